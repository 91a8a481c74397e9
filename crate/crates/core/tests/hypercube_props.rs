use lsilab::bounds::{self, DualExponent};
use lsilab::hypercube::{self, hypercube_ascent_options, HypercubeInstance};
use lsilab::ExtendedReal;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance() -> impl Strategy<Value = HypercubeInstance> {
    any::<u64>().prop_map(|seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        hypercube::random_instance(&mut rng, 5, &[0.1, 0.25, 0.4], 4).unwrap()
    })
}

struct Snapshot {
    c_p: f64,
    c_ls: f64,
    k: Vec<f64>,
}

fn snapshot(inst: &HypercubeInstance) -> Snapshot {
    let exps = [DualExponent::finite(2.0).unwrap(), DualExponent::infinity()];
    let rho = hypercube::mixture_distribution(inst).unwrap();
    let k = hypercube::exact_k_constants(inst, &exps).unwrap();
    Snapshot {
        c_p: hypercube::exact_poincare(&rho).unwrap(),
        c_ls: hypercube::lsi_lower_bound_instance(inst, &hypercube_ascent_options(8, 2000)).unwrap().value,
        k: k.k_p.iter().map(|e| e.1).chain([k.k_inf]).collect(),
    }
}

fn same(a: &Snapshot, b: &Snapshot) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * x.abs().max(1.0);
    close(a.c_p, b.c_p) && close(a.c_ls, b.c_ls) && a.k.iter().zip(&b.k).all(|(x, y)| close(*x, *y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coordinate_permutations_leave_constants_unchanged(inst in instance(), shuffle in any::<u64>()) {
        let n = inst.n();
        let mut perm: Vec<u32> = (0..n).collect();
        let mut s = shuffle;
        for i in (1..n as usize).rev() {
            perm.swap(i, (s % (i as u64 + 1)) as usize);
            s /= i as u64 + 1;
        }
        let (a, b) = (snapshot(&inst), snapshot(&inst.permuted(&perm).unwrap()));
        prop_assert!(same(&a, &b), "{} {} vs {} {}", a.c_p, a.c_ls, b.c_p, b.c_ls);
    }

    #[test]
    fn flipping_every_bit_leaves_constants_unchanged(inst in instance()) {
        let (a, b) = (snapshot(&inst), snapshot(&inst.flipped().unwrap()));
        prop_assert!(same(&a, &b), "{} {} vs {} {}", a.c_p, a.c_ls, b.c_p, b.c_ls);
    }

    #[test]
    fn exact_constants_respect_the_paper_bounds(inst in instance()) {
        let exps = [DualExponent::finite(2.0).unwrap(), DualExponent::finite(4.0).unwrap(), DualExponent::infinity()];
        let checks = hypercube::validate_theorem31(&inst, &exps, &hypercube_ascent_options(8, 500)).unwrap();
        prop_assert!(checks.iter().all(|c| c.all_pass()));
        let (k_ls, k_chi2) = bounds::bernoulli_pi_constants(inst.p()).unwrap();
        if inst.diameter() >= 1 {
            let cor45 = bounds::hypercube_lsi_bound(k_ls, k_chi2, inst.diameter()).unwrap();
            prop_assert!(ExtendedReal::Finite(checks[0].c_p_exact) <= cor45.bound_value);
            prop_assert!(ExtendedReal::Finite(checks[0].c_ls_lower) <= cor45.bound_value);
        }
    }

    #[test]
    fn k_p_never_exceeds_k_inf(inst in instance(), p in 1.05f64..30.0) {
        let k = hypercube::exact_k_constants(&inst, &[DualExponent::finite(p).unwrap()]).unwrap();
        prop_assert!(k.k_p[0].1 <= k.k_inf * (1.0 + 1e-14));
        prop_assert!(k.k_inf - 1.0 <= k.diameter_bound * (1.0 + 1e-12));
    }
}

#[test]
fn point_mass_poincare_is_dimension_free() {
    for p in [0.1, 0.25, 0.4] {
        for n in 1..=6 {
            let inst = HypercubeInstance::new(n, p, lsilab::DiscreteMeasure::new(vec![0], vec![1.0]).unwrap()).unwrap();
            let c = hypercube::exact_poincare(&hypercube::mixture_distribution(&inst).unwrap()).unwrap();
            assert!((c - p * (1.0 - p)).abs() <= 1e-8);
        }
    }
}

#[test]
fn two_point_constants_are_dimension_free() {
    let opts = hypercube_ascent_options(2, 300);
    for k in 1..=3u32 {
        for p in [0.1, 0.25] {
            let (k_ls, k_chi2) = bounds::bernoulli_pi_constants(p).unwrap();
            let cor45 = bounds::hypercube_lsi_bound(k_ls, k_chi2, k).unwrap().value();
            let mut cps = Vec::new();
            let mut lss = Vec::new();
            for n in k..=8 {
                let inst = hypercube::two_point_instance(n, k, p).unwrap();
                let rho = hypercube::mixture_distribution(&inst).unwrap();
                cps.push(hypercube::exact_poincare(&rho).unwrap());
                lss.push(hypercube::lsi_lower_bound_instance(&inst, &opts).unwrap().value);
            }
            for v in [&cps, &lss] {
                let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                assert!(hi - lo < 1e-8, "k={k} p={p}: {v:?}");
                assert!(hi <= cor45);
            }
        }
    }
}

#[test]
fn tightened_bound_dominates_the_certificate() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let inst = hypercube::random_instance(&mut rng, 5, &[0.1, 0.25, 0.4], 5).unwrap();
        let exps = [DualExponent::finite(2.0).unwrap(), DualExponent::infinity()];
        for c in hypercube::validate_theorem31(&inst, &exps, &hypercube_ascent_options(4, 500)).unwrap() {
            let ps = c.exponent.p_star();
            let (k_ls, _) = bounds::bernoulli_pi_constants(inst.p()).unwrap();
            let kp = c.lsi_bound.inputs["k_p"];
            let direct = bounds::tighten_defective_lsi(2.0 * ps * k_ls, ps * kp.ln(), c.c_p_exact);
            assert!((direct - c.tightened.value()).abs() <= 1e-12 * direct);
            assert!(c.c_ls_lower <= direct);
        }
    }
}
