//! Certified lower bounds on log-Sobolev constants of 1-d grid densities.
//!
//! Any non-constant test function `f` gives `C_LS(ρ) ≥ ent_ρ(f²) / (2 E_ρ|f′|²)`.
//! [`maximize_lsi_quotient`] searches for a good `f` by preconditioned
//! gradient ascent over node values. Only lower bounds are produced here.

use crate::ascent::{self, AscentOptions, QuotientModel};
use crate::error::{Error, Result};
use crate::spectral1d::{build_grid_density_with, poincare_constant_estimate, DirichletPair, GridDensity1D, GridOptions};

/// Node values of a test function on a [`GridDensity1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction1D {
    values: Vec<f64>,
}

impl TestFunction1D {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("test function has non-finite values".into()));
        }
        if values.windows(2).all(|w| w[0] == w[1]) {
            return Err(Error::Degenerate("test function is constant".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| c * v).collect())
    }
}

/// `C_LS(ρ) ≥ value`, up to `quadrature_error_estimate`.
#[derive(Debug, Clone, PartialEq)]
pub struct LsiLowerBoundCertificate {
    pub value: f64,
    pub witness: TestFunction1D,
    /// Change of the quotient when the witness is interpolated to the
    /// doubled grid.
    pub quadrature_error_estimate: f64,
    /// Best quotient reached from each restart.
    pub restart_values: Vec<f64>,
}

struct GridModel {
    forms: DirichletPair,
    shift: f64,
}

impl GridModel {
    fn new(rho: &GridDensity1D) -> Self {
        let forms = rho.forms();
        let shift = 1.0 / forms.variance(&rho.nodes());
        Self { forms, shift }
    }
}

impl QuotientModel for GridModel {
    fn weights(&self) -> &[f64] {
        &self.forms.mass
    }

    fn energy(&self, f: &[f64]) -> f64 {
        self.forms.energy(f)
    }

    fn energy_gradient(&self, f: &[f64], out: &mut [f64]) {
        self.forms.apply_stiffness(f, out);
        out.iter_mut().for_each(|v| *v *= 2.0);
    }

    // H¹ metric: (A + εM)⁻¹ g.
    fn precondition(&self, g: &[f64]) -> Vec<f64> {
        self.forms.solve_shifted(self.shift, g)
    }
}

/// `ent_ρ(f²) / (2 E_ρ|f′|²)` under the grid's discrete forms.
pub fn lsi_quotient(rho: &GridDensity1D, f: &TestFunction1D) -> Result<f64> {
    if f.values.len() != rho.n_points {
        return Err(Error::Input(format!(
            "test function has {} values, grid has {}",
            f.values.len(),
            rho.n_points
        )));
    }
    ascent::lsi_quotient_of(&GridModel::new(rho), &f.values)
        .ok_or_else(|| Error::Degenerate("test function has zero Dirichlet energy".into()))
}

/// The piecewise-linear witness: `−1` below `−R/2`, `+1` above `R/2`,
/// linear in between.
pub fn remark3_witness(r: f64, rho: &GridDensity1D) -> Result<TestFunction1D> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Input(format!("R must be positive, got {r}")));
    }
    if rho.left > -r || rho.right < r {
        return Err(Error::Input(format!(
            "grid window [{}, {}] does not contain [-{r}, {r}]",
            rho.left, rho.right
        )));
    }
    TestFunction1D::new(rho.nodes().into_iter().map(|y| witness_value(r, y)).collect())
}

fn witness_value(r: f64, y: f64) -> f64 {
    (2.0 * y / r).clamp(-1.0, 1.0)
}

fn starts(rho: &GridDensity1D, opts: &AscentOptions) -> Vec<Vec<f64>> {
    let nodes = rho.nodes();
    let forms = rho.forms();
    let mean = forms.mean(&nodes);
    let lambda = 1.0 / rho.t.sqrt();
    let centered: Vec<f64> = nodes.iter().map(|y| y - mean).collect();

    let mut list = vec![
        centered.iter().map(|y| (lambda * y / 2.0).exp()).collect(),
        centered.clone(),
    ];
    let pair_radius = rho.source.symmetric_pair_radius();
    if let Some(r) = pair_radius {
        list.push(nodes.iter().map(|&y| witness_value(r, y)).collect());
    }
    if let Ok(est) = poincare_constant_estimate(rho) {
        let phi = est.eigenfunction;
        let top = phi.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        for sign in [1.0, -1.0] {
            list.push(phi.iter().map(|v| 1.0 + sign * 0.5 * v / top).collect());
        }
    }
    list.truncate(opts.restarts.max(1));
    let mut rng = ascent::restart_rng(opts.seed);
    let width = rho.right - rho.left;
    let scale = forms.variance(&nodes).sqrt();
    while list.len() < opts.restarts.max(1) {
        let offset: f64 = rng.random_range(-2.0..2.0) * scale;
        let amps = ascent::noise(&mut rng, 4);
        let base: Vec<f64> = match pair_radius {
            Some(r) if rng.random_bool(0.5) => nodes.iter().map(|&y| scale * witness_value(r, y)).collect(),
            _ => centered.clone(),
        };
        list.push(
            nodes
                .iter()
                .zip(&base)
                .map(|(y, b)| {
                    let u = (y - rho.left) / width;
                    let wiggle: f64 = amps
                        .iter()
                        .enumerate()
                        .map(|(k, a)| a * ((k + 1) as f64 * std::f64::consts::PI * u).sin())
                        .sum();
                    b + offset + 0.5 * scale * wiggle
                })
                .collect(),
        );
    }
    list.truncate(opts.restarts.max(1));
    list
}

use rand::Rng;

pub fn maximize_lsi_quotient(rho: &GridDensity1D, restarts: usize, max_iters: usize) -> Result<LsiLowerBoundCertificate> {
    maximize_lsi_quotient_with(rho, &AscentOptions { restarts, max_iters, ..AscentOptions::default() })
}

/// Best LSI quotient over the restart seeds: an exponential tilt
/// `e^{y/(2√t)}`, the linear function, the piecewise-linear witness when the
/// source is a symmetric pair, `1 ± ½φ` for the grid's Poincaré
/// eigenfunction `φ`, then seeded random smooth perturbations.
pub fn maximize_lsi_quotient_with(rho: &GridDensity1D, opts: &AscentOptions) -> Result<LsiLowerBoundCertificate> {
    if opts.restarts == 0 {
        return Err(Error::Input("need at least one restart".into()));
    }
    let model = GridModel::new(rho);
    let mut best: Option<ascent::AscentTrace> = None;
    let mut restart_values = Vec::new();
    let mut last_err = None;
    for start in starts(rho, opts) {
        match ascent::ascend(&model, start, opts.max_iters, opts.rel_tol) {
            Ok(trace) => {
                restart_values.push(trace.best());
                if best.as_ref().is_none_or(|b| trace.best() > b.best()) {
                    best = Some(trace);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let trace = best.ok_or_else(|| {
        Error::Optimization(format!("every restart was degenerate: {}", last_err.map(|e| e.to_string()).unwrap_or_default()))
    })?;
    let witness = TestFunction1D::new(trace.witness)?;
    let value = lsi_quotient(rho, &witness)?;
    let quadrature_error_estimate = (refined_quotient(rho, &witness)? - value).abs();
    Ok(LsiLowerBoundCertificate { value, witness, quadrature_error_estimate, restart_values })
}

/// Quotient of the linearly interpolated witness on the doubled grid.
fn refined_quotient(rho: &GridDensity1D, f: &TestFunction1D) -> Result<f64> {
    let window_sigmas = (rho.right - rho.source.max_location()) / rho.t.sqrt();
    let fine = build_grid_density_with(
        &rho.source,
        rho.t,
        &GridOptions { n_points: 2 * rho.n_points - 1, window_sigmas, mass_tol: rho.mass_tol },
    )?;
    let v = f.values();
    let interp: Vec<f64> = (0..fine.n_points)
        .map(|i| if i % 2 == 0 { v[i / 2] } else { 0.5 * (v[i / 2] + v[i / 2 + 1]) })
        .collect();
    lsi_quotient(&fine, &TestFunction1D::new(interp)?)
}

/// Exact-density evaluation of the two displayed estimates behind the
/// `¼R² e^{R²/8t}` lower bound for `μ = ½δ_{−R} + ½δ_R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Remark3Check {
    pub mean: f64,
    pub variance: f64,
    pub dirichlet: f64,
    /// `(2/R²) e^{−R²/(8t)}`.
    pub dirichlet_bound: f64,
    pub both_pass: bool,
}

/// Composite Simpson quadrature of `E f`, `E f²`, `E|f′|²` under the exact
/// mixture density, with panels split at the kinks `±R/2`.
pub fn check_remark3_displays(r: f64, t: f64) -> Result<Remark3Check> {
    if !(r.is_finite() && r > 0.0 && t.is_finite() && t > 0.0) {
        return Err(Error::Input(format!("need R > 0 and t > 0, got R = {r}, t = {t}")));
    }
    let mu = crate::spectral1d::AtomicMixingMeasure1D::symmetric_pair(r)?;
    let reach = r + 40.0 * t.sqrt();
    let density = |y: f64| mu.density(y, t);
    let f = |y: f64| witness_value(r, y);
    let breaks = [-reach, -r / 2.0, r / 2.0, reach];

    let mut mean = 0.0;
    let mut second = 0.0;
    for seg in breaks.windows(2) {
        mean += simpson(|y| f(y) * density(y), seg[0], seg[1], 20_000);
        second += simpson(|y| f(y) * f(y) * density(y), seg[0], seg[1], 20_000);
    }
    let slope2 = 4.0 / (r * r);
    let dirichlet = slope2 * simpson(density, -r / 2.0, r / 2.0, 20_000);
    let variance = second - mean * mean;
    let dirichlet_bound = 2.0 / (r * r) * (-r * r / (8.0 * t)).exp();
    let both_pass = mean.abs() <= 1e-10 && variance >= 0.5 && dirichlet <= dirichlet_bound;
    Ok(Remark3Check { mean, variance, dirichlet, dirichlet_bound, both_pass })
}

fn simpson(g: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = crate::summation::CompensatedSum::new();
    acc.add(g(a));
    acc.add(g(b));
    for i in 1..n {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc.add(c * g(a + i as f64 * h));
    }
    acc.value() * h / 3.0
}
