//! End-to-end acceptance checks. Each test prints one PASS/FAIL line to
//! stderr (bypassing the harness capture) and then asserts.

use std::io::Write;
use std::time::{Duration, Instant};

use lsilab::ascent::AscentOptions;
use lsilab::bounds::{self, DualExponent, FormulaId, MixtureBoundInputs};
use lsilab::hypercube::{self, HypercubeInstance};
use lsilab::properties;
use lsilab::spectral1d::{build_grid_density, grid_refinement_study, poincare_constant_estimate};
use lsilab::variational::maximize_lsi_quotient;
use lsilab::{AtomicMixingMeasure1D, ExtendedReal};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SANDWICH_TOL: f64 = 1e-6;

fn report(id: u32, name: &str, pass: bool, elapsed: Duration, budget: Duration, detail: &str) {
    let within = elapsed <= budget;
    let verdict = if pass && within { "PASS" } else { "FAIL" };
    let line = format!(
        "criterion {id:>2} [{verdict}] {name}: {detail} ({:.2}s, budget {}s)\n",
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
    assert!(within, "criterion {id} exceeded its time budget: {:.2}s", elapsed.as_secs_f64());
}

fn below(lower: f64, upper: ExtendedReal) -> bool {
    match upper {
        ExtendedReal::Infinity => true,
        ExtendedReal::Finite(u) => lower <= u + SANDWICH_TOL * u.abs(),
    }
}

fn evaluate(id: FormulaId, get: &dyn Fn(&str) -> f64) -> f64 {
    let exponent = || DualExponent::new(get("p")).unwrap();
    let r = match id {
        FormulaId::Thm31Pi => {
            bounds::poincare_mixture_bound(&MixtureBoundInputs::new(get("k_p"), get("k"), exponent()).with_poincare(get("k_p")))
        }
        FormulaId::Thm31Lsi => bounds::lsi_mixture_bound(&MixtureBoundInputs::new(get("k_ls"), get("k"), exponent())),
        FormulaId::Cor41Gauss => bounds::gaussian_convolution_lsi_bound(get("R"), get("t")),
        FormulaId::Cor41T2 => bounds::gaussian_convolution_t2_bound(get("R"), get("t")),
        FormulaId::Rem3LargeT => bounds::gaussian_convolution_large_t_bound(get("R"), get("t")),
        FormulaId::Rem3Lower => bounds::remark3_poincare_lower_bound(get("R"), get("t")),
        FormulaId::Thm42Pi => bounds::subgaussian_bounds(get("sigma2"), get("c_sg"), get("t")).map(|b| b.0),
        FormulaId::Thm42Lsi => bounds::subgaussian_bounds(get("sigma2"), get("c_sg"), get("t")).map(|b| b.1),
        FormulaId::Cor43Diffusion => bounds::diffusion_lsi_bound(get("kappa"), get("t"), get("k_inf")),
        FormulaId::Cor44TwoMixture => bounds::two_mixture_lsi_bound(get("c0"), get("c1"), get("k")),
        FormulaId::Cor45Hypercube => bounds::hypercube_lsi_bound(get("k_ls"), get("k_chi2"), get("k") as u32),
        FormulaId::Cor45Bernoulli => bounds::bernoulli_hypercube_bound(get("p"), get("k") as u32),
        FormulaId::PropATighten => bounds::tighten_defective_lsi_report(get("c"), get("d"), get("c_p")),
    };
    let r = r.unwrap_or_else(|e| panic!("{id}: {e}"));
    assert_eq!(r.formula_id, id);
    r.value()
}

#[test]
fn criterion_01_formula_fidelity() {
    let start = Instant::now();
    let table = include_str!("data/formula_reference.tsv");
    let mut worst: f64 = 0.0;
    let mut count = std::collections::BTreeMap::new();
    for line in table.lines().filter(|l| !l.starts_with('#') && !l.is_empty()) {
        let cols: Vec<&str> = line.split('\t').collect();
        let id = FormulaId::parse(cols[0]).unwrap_or_else(|| panic!("unknown formula {}", cols[0]));
        let inputs: Vec<(&str, f64)> = cols[1]
            .split(',')
            .map(|kv| {
                let (k, v) = kv.split_once('=').unwrap();
                (k, if v == "inf" { f64::INFINITY } else { v.parse().unwrap() })
            })
            .collect();
        let get = |name: &str| inputs.iter().find(|(k, _)| *k == name).unwrap_or_else(|| panic!("missing {name}")).1;
        let expected: f64 = cols[2].parse().unwrap();
        let got = evaluate(id, &get);
        let rel = ((got - expected) / expected).abs();
        assert!(rel <= 1e-12, "{line}: got {got:e}, relative error {rel:e}");
        worst = worst.max(rel);
        *count.entry(id).or_insert(0) += 1;
    }
    let anchor = bounds::gaussian_convolution_lsi_bound(1.0, 1.0).unwrap().value();
    let anchor_ok = ((anchor - 30.0 * 4f64.exp()) / anchor).abs() <= 1e-12;
    let all_ten = count.len() == FormulaId::ALL.len() && count.values().all(|c| *c == 10);
    report(
        1,
        "formula fidelity",
        worst <= 1e-12 && anchor_ok && all_ten,
        start.elapsed(),
        Duration::from_secs(1),
        &format!("{} formulas x 10 points, worst relative error {worst:.2e}", count.len()),
    );
}

#[test]
fn criterion_02_gaussian_spectral() {
    let start = Instant::now();
    let mu = AtomicMixingMeasure1D::dirac(0.0).unwrap();
    let mut worst_direct: f64 = 0.0;
    let mut worst_extrap: f64 = 0.0;
    for t in [0.5, 1.0, 2.0] {
        let est = poincare_constant_estimate(&build_grid_density(&mu, t, 4001, 8.0).unwrap()).unwrap();
        worst_direct = worst_direct.max((est.value - t).abs() / t);
        let table = grid_refinement_study(&mu, t, &[1001, 2001, 4001], 8.0).unwrap();
        worst_extrap = worst_extrap.max((table.extrapolated - t).abs() / t);
    }
    report(
        2,
        "gaussian spectral ground truth",
        worst_direct <= 1e-3 && worst_extrap <= 1e-5,
        start.elapsed(),
        Duration::from_secs(10),
        &format!("max rel error {worst_direct:.2e} at n=4001, {worst_extrap:.2e} extrapolated"),
    );
}

#[test]
fn criterion_03_gaussian_variational() {
    let start = Instant::now();
    let mu = AtomicMixingMeasure1D::dirac(0.0).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for t in [0.5, 1.0, 2.0] {
        let cert = maximize_lsi_quotient(&build_grid_density(&mu, t, 4001, 8.0).unwrap(), 8, 500).unwrap();
        ok &= cert.value >= t * (1.0 - 1e-2) && cert.value <= t * (1.0 + 1e-2);
        detail.push(format!("t={t}: {:.6}", cert.value));
    }
    report(3, "gaussian variational ground truth", ok, start.elapsed(), Duration::from_secs(60), &detail.join(", "));
}

#[test]
fn criterion_04_remark_sandwich() {
    let start = Instant::now();
    let mu = AtomicMixingMeasure1D::symmetric_pair(1.0).unwrap();
    let mut passed = 0;
    let mut total = 0;
    let mut failures = Vec::new();
    for t in [0.125, 0.25, 0.5, 1.0] {
        let grid = build_grid_density(&mu, t, 4001, 8.0).unwrap();
        let c_p = poincare_constant_estimate(&grid).unwrap().value;
        let cert = maximize_lsi_quotient(&grid, 8, 500).unwrap().value;
        let lower = bounds::remark3_poincare_lower_bound(1.0, t).unwrap();
        let upper = bounds::gaussian_convolution_lsi_bound(1.0, t).unwrap().bound_value;
        for (name, ok) in [
            ("rem3_lower <= C_P", below(lower.value(), ExtendedReal::Finite(c_p))),
            ("certificate <= cor41", below(cert, upper)),
            ("C_P <= cor41", below(c_p, upper)),
        ] {
            total += 1;
            if ok {
                passed += 1;
            } else {
                failures.push(format!("t={t}: {name}"));
            }
        }
    }
    report(
        4,
        "sandwich for the symmetric pair",
        passed == 12 && total == 12,
        start.elapsed(),
        Duration::from_secs(300),
        &format!("{passed}/{total} inequalities hold {failures:?}"),
    );
}

#[test]
fn criterion_05_exponential_scaling() {
    let start = Instant::now();
    let mu = AtomicMixingMeasure1D::symmetric_pair(1.0).unwrap();
    let pts: Vec<(f64, f64)> = [0.125, 0.25, 0.5]
        .iter()
        .map(|&t| {
            let c = poincare_constant_estimate(&build_grid_density(&mu, t, 4001, 8.0).unwrap()).unwrap().value;
            (1.0 / t, c.ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    report(
        5,
        "exponential blow-up slope",
        (0.125..=4.0).contains(&slope),
        start.elapsed(),
        Duration::from_secs(120),
        &format!("slope of log C_P against R^2/t = {slope:.4}"),
    );
}

#[test]
fn criterion_06_property_suites() {
    let start = Instant::now();
    let outcomes = properties::run_all(0, 10_000).unwrap();
    let detail: Vec<String> = outcomes.iter().map(|o| format!("{} {:.1e}", o.check.as_str(), o.worst)).collect();
    report(
        6,
        "finite-space property suites",
        outcomes.iter().all(|o| o.pass && o.instances == 10_000),
        start.elapsed(),
        Duration::from_secs(30),
        &detail.join(", "),
    );
}

#[test]
fn criterion_07_mixture_theorem_on_hypercube() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let exps = [DualExponent::finite(2.0).unwrap(), DualExponent::finite(4.0).unwrap(), DualExponent::infinity()];
    let opts = AscentOptions { restarts: 8, max_iters: 500, rel_tol: 1e-12, seed: 0 };
    let mut checks = 0;
    let mut failures = Vec::new();
    for i in 0..200 {
        let inst = hypercube::random_instance(&mut rng, 6, &[0.1, 0.25, 0.4], 6).unwrap();
        for c in hypercube::validate_theorem31(&inst, &exps, &opts).unwrap() {
            checks += 3;
            if !c.all_pass() {
                failures.push(format!("instance {i} p={}", c.exponent));
            }
        }
    }
    report(
        7,
        "mixture theorem against exact hypercube constants",
        failures.is_empty(),
        start.elapsed(),
        Duration::from_secs(300),
        &format!("200 instances, {checks} inequalities, failures {failures:?}"),
    );
}

#[test]
fn criterion_08_dimension_freeness() {
    let start = Instant::now();
    let mut worst_spread: f64 = 0.0;
    let mut all_below = true;
    for k in 1..=3u32 {
        for p in [0.1, 0.25, 0.4] {
            let (k_ls, k_chi2) = bounds::bernoulli_pi_constants(p).unwrap();
            let bound = bounds::hypercube_lsi_bound(k_ls, k_chi2, k).unwrap();
            let values: Vec<f64> = (k..=8)
                .map(|n| {
                    let inst = hypercube::two_point_instance(n, k, p).unwrap();
                    hypercube::exact_poincare(&hypercube::mixture_distribution(&inst).unwrap()).unwrap()
                })
                .collect();
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            worst_spread = worst_spread.max(hi - lo);
            all_below &= values.iter().all(|v| ExtendedReal::Finite(*v) <= bound.bound_value);
        }
    }
    report(
        8,
        "dimension-free exact Poincare constants",
        worst_spread < 1e-8 && all_below,
        start.elapsed(),
        Duration::from_secs(180),
        &format!("max spread over n = {worst_spread:.2e}, all below cor45_hypercube: {all_below}"),
    );
}

#[test]
fn criterion_09_bernoulli_lsi() {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for p in [0.1, 0.25, 0.4] {
        let inst = HypercubeInstance::from_bitstrings(p, &[("0", 1.0)]).unwrap();
        let rho = hypercube::mixture_distribution(&inst).unwrap();
        let got = hypercube::lsi_lower_bound_hypercube(&rho, 8, 2000).unwrap().value;
        let (k_ls, _) = bounds::bernoulli_pi_constants(p).unwrap();
        let rel = (got - k_ls).abs() / k_ls;
        ok &= rel <= 1e-2;
        detail.push(format!("p={p}: {got:.6} vs {k_ls:.6}"));
    }
    report(9, "Bernoulli LSI constant recovery", ok, start.elapsed(), Duration::from_secs(30), &detail.join(", "));
}

#[test]
fn criterion_10_subgaussian_theorem() {
    let start = Instant::now();
    let r = 1.0;
    let mu = AtomicMixingMeasure1D::symmetric_pair(r).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for sigma2 in [mu.spread().powi(2), r * r] {
        let c_sg = mu.subgaussian_constant(sigma2).unwrap();
        for t in [2.0 * sigma2, 4.0 * sigma2] {
            let (pi, lsi) = bounds::subgaussian_bounds(sigma2, c_sg, t).unwrap();
            let grid = build_grid_density(&mu, t, 4001, 8.0).unwrap();
            let c_p = poincare_constant_estimate(&grid).unwrap().value;
            let cert = maximize_lsi_quotient(&grid, 8, 500).unwrap().value;
            ok &= below(c_p, pi.bound_value) && below(cert, lsi.bound_value);
            detail.push(format!("s2={sigma2} t={t}: {c_p:.4} <= {:.4}, {cert:.4} <= {:.4}", pi.value(), lsi.value()));
        }
    }
    report(10, "sub-Gaussian theorem", ok, start.elapsed(), Duration::from_secs(120), &detail.join("; "));
}
