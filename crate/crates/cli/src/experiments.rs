//! Dispatch from grid points to the core routines, one row per method.

use std::time::Instant;

use lsilab::ascent::AscentOptions;
use lsilab::bounds::{self, BoundReport};
use lsilab::spectral1d::{build_grid_density, poincare_constant_estimate_with, SolverOptions};
use lsilab::variational::{check_remark3_displays, maximize_lsi_quotient_with};
use lsilab::{hypercube, AtomicMixingMeasure1D, Direction, DualExponent, FormulaId, GridDensity1D, MixtureBoundInputs};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::report::{param_text, ReportRow};
use crate::CliError;

/// One point of the Cartesian product of the swept grids.
#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub index: usize,
    pub params: Vec<(String, f64)>,
}

impl Unit {
    fn get(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    fn key(&self) -> String {
        instance_key(&self.params)
    }
}

fn instance_key(params: &[(String, f64)]) -> String {
    params.iter().map(|(k, v)| format!("{k}={}", param_text(*v))).collect::<Vec<_>>().join(",")
}

/// Keys expanded inside a unit rather than swept.
fn inner_keys(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::HypercubeValidation => &["exponent", "instances"],
        ExperimentKind::ConvergenceStudy => &["ladder"],
        _ => &[],
    }
}

/// Grid points in canonical order: keys sorted, values in listed order, last
/// key varying fastest. Hypercube sweeps add a `replicate` index.
pub fn units(cfg: &ExperimentConfig) -> Result<Vec<Unit>, CliError> {
    let inner = inner_keys(cfg.experiment);
    let mut axes: Vec<(String, Vec<f64>)> =
        cfg.grid.iter().filter(|(k, _)| !inner.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect();
    if cfg.experiment == ExperimentKind::HypercubeValidation {
        let count = cfg.scalar("instances")?;
        if !(count >= 1.0 && count.fract() == 0.0 && count <= 1e7) {
            return Err(CliError::Config(format!("instances must be a positive integer, got {count}")));
        }
        axes.push(("replicate".into(), (0..count as usize).map(|i| i as f64).collect()));
    }
    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    let mut out = Vec::with_capacity(total);
    for index in 0..total {
        let mut rem = index;
        let mut params = vec![(String::new(), 0.0); axes.len()];
        for (slot, (k, vals)) in params.iter_mut().zip(&axes).rev() {
            *slot = (k.clone(), vals[rem % vals.len()]);
            rem /= vals.len();
        }
        out.push(Unit { index, params });
    }
    Ok(out)
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    instance: String,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, (start.elapsed().as_secs_f64() * 1e6).round() / 1e3)
}

impl Ctx<'_> {
    fn row(&self, constant: &str, method: &str, direction: Direction, value: Result<f64, String>, wall_ms: f64) -> ReportRow {
        let (value, error) = match value {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e)),
        };
        ReportRow {
            experiment: self.cfg.experiment.as_str().into(),
            instance: self.instance.clone(),
            constant: constant.into(),
            method: method.into(),
            value,
            log_value: value.map(f64::ln),
            direction,
            pass: None,
            seed: self.cfg.seed,
            wall_ms,
            error,
            warning: None,
        }
    }

    fn bound(&self, id: FormulaId, direction: Direction, target: &str, r: lsilab::Result<BoundReport>, wall_ms: f64) -> ReportRow {
        match r {
            Ok(b) => {
                let mut row = self.row(b.target.as_str(), id.as_str(), b.direction, Ok(b.value()), wall_ms);
                row.log_value = Some(b.log_value);
                row.warning = b.warning;
                row
            }
            Err(e) => self.row(target, id.as_str(), direction, Err(e.to_string()), wall_ms),
        }
    }

    fn timed_bound(&self, id: FormulaId, direction: Direction, target: &str, f: impl FnOnce() -> lsilab::Result<BoundReport>) -> ReportRow {
        let (r, ms) = timed(f);
        self.bound(id, direction, target, r, ms)
    }

    fn grid(&self, mu: &AtomicMixingMeasure1D, t: f64) -> lsilab::Result<GridDensity1D> {
        build_grid_density(mu, t, self.cfg.overrides.n_points, self.cfg.overrides.window_sigmas)
    }

    fn spectral_row(&self, grid: &lsilab::Result<GridDensity1D>) -> ReportRow {
        let opts = SolverOptions { rel_tol: self.cfg.overrides.solver_tolerance, ..SolverOptions::default() };
        let (r, ms) = timed(|| match grid {
            Ok(g) => poincare_constant_estimate_with(g, &opts).map(|e| e.value).map_err(|e| e.to_string()),
            Err(e) => Err(e.to_string()),
        });
        self.row("C_P", "spectral_fd", Direction::Estimate, r, ms)
    }

    fn variational_row(&self, grid: &lsilab::Result<GridDensity1D>) -> ReportRow {
        let o = &self.cfg.overrides;
        let opts = AscentOptions { restarts: o.restarts, max_iters: o.max_iters, rel_tol: 1e-9, seed: self.cfg.seed };
        let (r, ms) = timed(|| match grid {
            Ok(g) => maximize_lsi_quotient_with(g, &opts).map(|c| c.value).map_err(|e| e.to_string()),
            Err(e) => Err(e.to_string()),
        });
        self.row("C_LS", "variational_ascent", Direction::Lower, r, ms)
    }
}

fn symmetric_source(r: f64) -> lsilab::Result<AtomicMixingMeasure1D> {
    if r == 0.0 {
        AtomicMixingMeasure1D::dirac(0.0)
    } else {
        AtomicMixingMeasure1D::symmetric_pair(r)
    }
}

fn required(unit: &Unit, key: &str) -> f64 {
    unit.get(key).unwrap_or(f64::NAN)
}

/// Gaussian-family bounds that need only `R` and `t`, skipping those outside
/// their domain.
fn gaussian_bounds(ctx: &Ctx, r: f64, t: f64, rows: &mut Vec<ReportRow>) {
    rows.push(ctx.timed_bound(FormulaId::Cor41Gauss, Direction::Upper, "C_LS", || bounds::gaussian_convolution_lsi_bound(r, t)));
    if t >= 4.0 * r * r {
        rows.push(ctx.timed_bound(FormulaId::Rem3LargeT, Direction::Upper, "C_LS", || bounds::gaussian_convolution_large_t_bound(r, t)));
    }
}

fn remark3_lower(ctx: &Ctx, r: f64, t: f64, rows: &mut Vec<ReportRow>) {
    if r > 0.0 {
        rows.push(ctx.timed_bound(FormulaId::Rem3Lower, Direction::Lower, "C_P", || bounds::remark3_poincare_lower_bound(r, t)));
    }
}

pub fn run_unit(cfg: &ExperimentConfig, unit: &Unit) -> Vec<ReportRow> {
    let ctx = Ctx { cfg, instance: unit.key() };
    match cfg.experiment {
        ExperimentKind::FormulaTable => formula_table(&ctx, unit),
        ExperimentKind::Gaussian1dSandwich => sandwich(&ctx, unit),
        ExperimentKind::Remark3 => remark3(&ctx, unit),
        ExperimentKind::Subgaussian => subgaussian(&ctx, unit),
        ExperimentKind::HypercubeValidation => hypercube_validation(cfg, unit),
        ExperimentKind::ConvergenceStudy => convergence(&ctx, unit),
    }
}

/// Inputs each formula reads from the grid, and whether a grid point lies in
/// its domain.
fn formula_inputs(id: FormulaId) -> &'static [&'static str] {
    match id {
        FormulaId::Thm31Pi | FormulaId::Thm31Lsi => &["k_ls", "k_p", "p"],
        FormulaId::Cor41Gauss | FormulaId::Cor41T2 | FormulaId::Rem3LargeT | FormulaId::Rem3Lower => &["R", "t"],
        FormulaId::Thm42Pi | FormulaId::Thm42Lsi => &["sigma2", "c_sg", "t"],
        FormulaId::Cor43Diffusion => &["kappa", "t", "k_inf"],
        FormulaId::Cor44TwoMixture => &["c0", "c1", "k_chi2"],
        FormulaId::Cor45Hypercube => &["k_ls_pi", "k_chi2_pi", "k"],
        FormulaId::Cor45Bernoulli => &["p_bernoulli", "k"],
        FormulaId::PropATighten => &["c", "d", "c_p"],
    }
}

fn in_domain(id: FormulaId, u: &Unit) -> bool {
    let g = |k| required(u, k);
    match id {
        FormulaId::Rem3LargeT => g("t") >= 4.0 * g("R") * g("R"),
        FormulaId::Rem3Lower => g("R") > 0.0,
        FormulaId::Thm42Pi | FormulaId::Thm42Lsi => g("t") > g("sigma2"),
        FormulaId::Cor45Bernoulli => g("p_bernoulli") > 0.0 && g("p_bernoulli") < 0.5,
        _ => true,
    }
}

fn as_count(x: f64) -> lsilab::Result<u32> {
    if x >= 1.0 && x.fract() == 0.0 && x <= f64::from(u32::MAX) {
        Ok(x as u32)
    } else {
        Err(lsilab::Error::Input(format!("k must be a positive integer, got {x}")))
    }
}

fn evaluate_formula(id: FormulaId, u: &Unit) -> lsilab::Result<BoundReport> {
    let g = |k| required(u, k);
    let mixture = || -> lsilab::Result<MixtureBoundInputs> {
        let inp = MixtureBoundInputs::new(g("k_ls"), g("k_p"), DualExponent::new(g("p"))?);
        Ok(match u.get("k_poincare") {
            Some(kp) => inp.with_poincare(kp),
            None => inp,
        })
    };
    match id {
        FormulaId::Thm31Pi => bounds::poincare_mixture_bound(&mixture()?),
        FormulaId::Thm31Lsi => bounds::lsi_mixture_bound(&mixture()?),
        FormulaId::Cor41Gauss => bounds::gaussian_convolution_lsi_bound(g("R"), g("t")),
        FormulaId::Cor41T2 => bounds::gaussian_convolution_t2_bound(g("R"), g("t")),
        FormulaId::Rem3LargeT => bounds::gaussian_convolution_large_t_bound(g("R"), g("t")),
        FormulaId::Rem3Lower => bounds::remark3_poincare_lower_bound(g("R"), g("t")),
        FormulaId::Thm42Pi => bounds::subgaussian_bounds(g("sigma2"), g("c_sg"), g("t")).map(|b| b.0),
        FormulaId::Thm42Lsi => bounds::subgaussian_bounds(g("sigma2"), g("c_sg"), g("t")).map(|b| b.1),
        FormulaId::Cor43Diffusion => bounds::diffusion_lsi_bound(g("kappa"), g("t"), g("k_inf")),
        FormulaId::Cor44TwoMixture => bounds::two_mixture_lsi_bound(g("c0"), g("c1"), g("k_chi2")),
        FormulaId::Cor45Hypercube => bounds::hypercube_lsi_bound(g("k_ls_pi"), g("k_chi2_pi"), as_count(g("k"))?),
        FormulaId::Cor45Bernoulli => bounds::bernoulli_hypercube_bound(g("p_bernoulli"), as_count(g("k"))?),
        FormulaId::PropATighten => bounds::tighten_defective_lsi_report(g("c"), g("d"), g("c_p")),
    }
}

fn formula_target(id: FormulaId) -> (Direction, &'static str) {
    match id {
        FormulaId::Thm31Pi | FormulaId::Thm42Pi => (Direction::Upper, "C_P"),
        FormulaId::Rem3Lower => (Direction::Lower, "C_P"),
        FormulaId::Cor41T2 => (Direction::Upper, "C_T2"),
        _ => (Direction::Upper, "C_LS"),
    }
}

/// Every formula whose inputs are all on the grid and whose domain contains
/// the grid point.
pub fn applicable_formulas(unit: &Unit) -> Vec<FormulaId> {
    FormulaId::ALL
        .into_iter()
        .filter(|&id| formula_inputs(id).iter().all(|k| unit.get(k).is_some()) && in_domain(id, unit))
        .collect()
}

fn formula_table(ctx: &Ctx, unit: &Unit) -> Vec<ReportRow> {
    applicable_formulas(unit)
        .into_iter()
        .map(|id| {
            let (dir, target) = formula_target(id);
            ctx.timed_bound(id, dir, target, || evaluate_formula(id, unit))
        })
        .collect()
}

fn sandwich(ctx: &Ctx, unit: &Unit) -> Vec<ReportRow> {
    let (r, t) = (required(unit, "R"), required(unit, "t"));
    let mut rows = Vec::new();
    remark3_lower(ctx, r, t, &mut rows);
    let grid = symmetric_source(r).and_then(|mu| ctx.grid(&mu, t));
    rows.push(ctx.spectral_row(&grid));
    rows.push(ctx.variational_row(&grid));
    gaussian_bounds(ctx, r, t, &mut rows);
    rows
}

fn remark3(ctx: &Ctx, unit: &Unit) -> Vec<ReportRow> {
    let (r, t) = (required(unit, "R"), required(unit, "t"));
    let mut rows = Vec::new();
    remark3_lower(ctx, r, t, &mut rows);
    let (witness, ms) = timed(|| check_remark3_displays(r, t).map(|c| c.variance / c.dirichlet).map_err(|e| e.to_string()));
    rows.push(ctx.row("C_P", "remark3_witness", Direction::Lower, witness, ms));
    let grid = symmetric_source(r).and_then(|mu| ctx.grid(&mu, t));
    rows.push(ctx.spectral_row(&grid));
    gaussian_bounds(ctx, r, t, &mut rows);
    rows
}

fn subgaussian(ctx: &Ctx, unit: &Unit) -> Vec<ReportRow> {
    let (r, sigma2, t) = (required(unit, "R"), required(unit, "sigma2"), required(unit, "t"));
    let mut rows = Vec::new();
    let mu = symmetric_source(r);
    let (pair, ms) = timed(|| {
        let mu = mu.clone()?;
        bounds::subgaussian_bounds(sigma2, mu.subgaussian_constant(sigma2)?, t)
    });
    match pair {
        Ok((pi, lsi)) => {
            rows.push(ctx.bound(FormulaId::Thm42Pi, Direction::Upper, "C_P", Ok(pi), ms));
            rows.push(ctx.bound(FormulaId::Thm42Lsi, Direction::Upper, "C_LS", Ok(lsi), ms));
        }
        Err(e) => {
            rows.push(ctx.bound(FormulaId::Thm42Pi, Direction::Upper, "C_P", Err(e.clone()), ms));
            rows.push(ctx.bound(FormulaId::Thm42Lsi, Direction::Upper, "C_LS", Err(e), ms));
        }
    }
    let grid = mu.and_then(|mu| ctx.grid(&mu, t));
    rows.push(ctx.spectral_row(&grid));
    rows.push(ctx.variational_row(&grid));
    rows
}

fn convergence(ctx: &Ctx, unit: &Unit) -> Vec<ReportRow> {
    let (r, t) = (required(unit, "R"), required(unit, "t"));
    let ladder = &ctx.cfg.grid["ladder"];
    let mut rows = Vec::new();
    remark3_lower(ctx, r, t, &mut rows);
    let (study, ms) = timed(|| -> Result<_, String> {
        if ladder.iter().any(|n| !(*n >= 3.0 && n.fract() == 0.0)) {
            return Err(format!("ladder entries must be integers ≥ 3, got {ladder:?}"));
        }
        let sizes: Vec<usize> = ladder.iter().map(|n| *n as usize).collect();
        let mu = symmetric_source(r).map_err(|e| e.to_string())?;
        lsilab::spectral1d::grid_refinement_study(&mu, t, &sizes, ctx.cfg.overrides.window_sigmas).map_err(|e| e.to_string())
    });
    match study {
        Ok(table) => {
            let per_row = ms / table.rows.len() as f64;
            for row in &table.rows {
                rows.push(ctx.row("C_P", &format!("spectral_fd_n{}", row.n_points), Direction::Estimate, Ok(row.estimate), per_row));
            }
            rows.push(ctx.row("C_P", "richardson", Direction::Estimate, Ok(table.extrapolated), 0.0));
            let order = table.observed_order.ok_or_else(|| "fewer than three usable grids".to_string());
            let mut order_row = ctx.row("order", "observed_order", Direction::Estimate, order, 0.0);
            if order_row.error.is_some() {
                // not a failure of the study, only an absent diagnostic
                order_row.warning = order_row.error.take();
            }
            if table.non_monotone {
                order_row.warning = Some("differences do not shrink monotonically".into());
            }
            rows.push(order_row);
        }
        Err(e) => rows.push(ctx.row("C_P", "richardson", Direction::Estimate, Err(e), ms)),
    }
    gaussian_bounds(ctx, r, t, &mut rows);
    rows
}

fn hypercube_validation(cfg: &ExperimentConfig, unit: &Unit) -> Vec<ReportRow> {
    let exponents = &cfg.grid["exponent"];
    let (max_n, max_atoms, p) = (required(unit, "max_n"), required(unit, "max_atoms"), required(unit, "p"));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (unit.index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let inst = (|| {
        if !(max_n >= 1.0 && max_n.fract() == 0.0 && max_n <= f64::from(hypercube::MAX_DIMENSION)) {
            return Err(lsilab::Error::Input(format!("max_n must be an integer in [1, {}], got {max_n}", hypercube::MAX_DIMENSION)));
        }
        if !(max_atoms >= 1.0 && max_atoms.fract() == 0.0) {
            return Err(lsilab::Error::Input(format!("max_atoms must be a positive integer, got {max_atoms}")));
        }
        hypercube::random_instance(&mut rng, max_n as u32, &[p], max_atoms as usize)
    })();

    let mut base = unit.params.clone();
    if let Ok(inst) = &inst {
        base.push(("n".into(), f64::from(inst.n())));
        base.push(("diameter".into(), f64::from(inst.diameter())));
    }
    let o = &cfg.overrides;
    let opts = AscentOptions { restarts: o.restarts, max_iters: o.max_iters, rel_tol: 1e-12, seed: cfg.seed };
    let (checks, ms) = timed(|| {
        let inst = inst.as_ref().map_err(Clone::clone)?;
        let exps = exponents.iter().map(|&e| DualExponent::new(e)).collect::<lsilab::Result<Vec<_>>>()?;
        hypercube::validate_theorem31(inst, &exps, &opts)
    });
    let cube_bounds = inst.as_ref().ok().filter(|i| i.diameter() >= 1).map(|i| {
        let k = i.diameter();
        let hyper = bounds::bernoulli_pi_constants(i.p()).and_then(|(k_ls, k_chi2)| bounds::hypercube_lsi_bound(k_ls, k_chi2, k));
        (hyper, bounds::bernoulli_hypercube_bound(i.p(), k))
    });

    let mut rows = Vec::new();
    for (j, &e) in exponents.iter().enumerate() {
        let mut params = base.clone();
        params.push(("exponent".into(), e));
        let ctx = Ctx { cfg, instance: instance_key(&params) };
        match &checks {
            Ok(list) => {
                let c = &list[j];
                rows.push(ctx.row("C_P", "exact_eigensolve", Direction::Estimate, Ok(c.c_p_exact), ms));
                rows.push(ctx.row("C_LS", "lsi_ascent", Direction::Lower, Ok(c.c_ls_lower), ms));
                rows.push(ctx.bound(FormulaId::Thm31Pi, Direction::Upper, "C_P", Ok(c.poincare_bound.clone()), 0.0));
                rows.push(ctx.bound(FormulaId::Thm31Lsi, Direction::Upper, "C_LS", Ok(c.lsi_bound.clone()), 0.0));
                rows.push(ctx.bound(FormulaId::PropATighten, Direction::Upper, "C_LS", Ok(c.tightened.clone()), 0.0));
            }
            Err(err) => {
                rows.push(ctx.row("C_P", "exact_eigensolve", Direction::Estimate, Err(err.to_string()), ms));
                rows.push(ctx.row("C_LS", "lsi_ascent", Direction::Lower, Err(err.to_string()), ms));
            }
        }
        if let Some((hyper, bern)) = &cube_bounds {
            rows.push(ctx.bound(FormulaId::Cor45Hypercube, Direction::Upper, "C_LS", hyper.clone(), 0.0));
            rows.push(ctx.bound(FormulaId::Cor45Bernoulli, Direction::Upper, "C_LS", bern.clone(), 0.0));
        }
    }
    rows
}
