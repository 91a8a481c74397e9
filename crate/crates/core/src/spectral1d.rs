//! Poincaré constants of one-dimensional Gaussian convolutions `μ * γ_{0,t}`.
//!
//! The density is tabulated on a uniform grid over a truncation window and
//! the Dirichlet form `E_ρ|f′|²` is discretized with a finite-volume scheme:
//!
//! ```text
//! E(f)   = Σ_j a_j (f_{j+1} − f_j)²,   a_j = ρ(y_{j+½}) / (h Z)
//! var(f) = Σ_i w_i (f_i − m)²,          w_i = c_i h ρ(y_i) / Z
//! ```
//!
//! with trapezoid factors `c_i` (½ at the two ends) and `Z` the trapezoid
//! mass, so that `Σ w_i = 1`. No flux leaves the window (Neumann boundary).
//! The Poincaré constant of the discrete pair is `1/λ₁`, where `λ₁` is the
//! smallest nonzero generalized eigenvalue of `A v = λ M v`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::summation::{compensated_sum, CompensatedSum};

/// Finitely many atoms on the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMixingMeasure1D {
    atoms: Vec<(f64, f64)>,
    radius: f64,
}

impl AtomicMixingMeasure1D {
    /// `atoms` are `(location, weight)` pairs.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Input("mixing measure needs at least one atom".into()));
        }
        for &(x, w) in &atoms {
            if !x.is_finite() {
                return Err(Error::Input(format!("atom location {x} is not finite")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Input(format!("atom weight {w} must be positive")));
            }
        }
        let total = compensated_sum(atoms.iter().map(|a| a.1));
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Input(format!("atom weights sum to {total}, not 1")));
        }
        let radius = atoms.iter().map(|a| a.0.abs()).fold(0.0, f64::max);
        Ok(Self { atoms, radius })
    }

    pub fn dirac(x: f64) -> Result<Self> {
        Self::new(vec![(x, 1.0)])
    }

    /// `½δ_{−r} + ½δ_r`.
    pub fn symmetric_pair(r: f64) -> Result<Self> {
        Self::new(vec![(-r, 0.5), (r, 0.5)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `max |location|`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn min_location(&self) -> f64 {
        self.atoms.iter().map(|a| a.0).fold(f64::INFINITY, f64::min)
    }

    pub fn max_location(&self) -> f64 {
        self.atoms.iter().map(|a| a.0).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn shifted(&self, c: f64) -> Result<Self> {
        Self::new(self.atoms.iter().map(|&(x, w)| (x + c, w)).collect())
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.atoms.iter().map(|&(x, w)| (s * x, w)).collect())
    }

    /// `R = max |x|` when the atoms are `½δ_{−R} + ½δ_R`.
    pub fn symmetric_pair_radius(&self) -> Option<f64> {
        match self.atoms.as_slice() {
            [(a, wa), (b, wb)] if *a == -*b && *wa == 0.5 && *wb == 0.5 && *a != 0.0 => Some(a.abs()),
            _ => None,
        }
    }

    /// `max |x − x'|` over pairs of atoms.
    pub fn spread(&self) -> f64 {
        self.max_location() - self.min_location()
    }

    /// `∬ exp(|x−x'|²/σ²) dμ dμ`, summed over all pairs of atoms.
    pub fn subgaussian_constant(&self, sigma2: f64) -> Result<f64> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::Input(format!("σ² must be positive, got {sigma2}")));
        }
        let logs: Vec<f64> = self
            .atoms
            .iter()
            .flat_map(|&(x, wx)| self.atoms.iter().map(move |&(y, wy)| (wx * wy).ln() + (x - y) * (x - y) / sigma2))
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s = compensated_sum(logs.iter().map(|l| (l - max).exp()));
        Ok((max + s.ln()).exp())
    }

    /// `log (μ * γ_{0,t})(y)`, by log-sum-exp over atoms.
    pub fn log_density(&self, y: f64, t: f64) -> f64 {
        let exps: Vec<f64> = self
            .atoms
            .iter()
            .map(|&(x, w)| w.ln() - (y - x) * (y - x) / (2.0 * t))
            .collect();
        let max = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        let s: f64 = exps.iter().map(|e| (e - max).exp()).sum();
        max + s.ln() - 0.5 * (2.0 * PI * t).ln()
    }

    pub fn density(&self, y: f64, t: f64) -> f64 {
        self.log_density(y, t).exp()
    }
}

/// Grid construction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub n_points: usize,
    pub window_sigmas: f64,
    pub mass_tol: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { n_points: 4001, window_sigmas: 8.0, mass_tol: 1e-10 }
    }
}

/// Density of `μ * γ_{0,t}` tabulated on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity1D {
    pub left: f64,
    pub right: f64,
    pub n_points: usize,
    /// Density at the nodes.
    pub values: Vec<f64>,
    /// Density at the cell midpoints `y_{j+½}`.
    pub midpoint_values: Vec<f64>,
    pub t: f64,
    /// Trapezoid integral of the density over the window.
    pub total_mass: f64,
    pub mass_tol: f64,
    pub source: AtomicMixingMeasure1D,
}

impl GridDensity1D {
    pub fn spacing(&self) -> f64 {
        (self.right - self.left) / (self.n_points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.left + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    /// Normalized trapezoid weights `w_i`, summing to 1.
    pub fn mass_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let n = self.n_points;
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let c = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                c * h * v / self.total_mass
            })
            .collect()
    }

    /// Edge weights `a_j` of the discrete Dirichlet form.
    pub fn edge_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        self.midpoint_values.iter().map(|v| v / (h * self.total_mass)).collect()
    }

    pub fn forms(&self) -> DirichletPair {
        DirichletPair { mass: self.mass_weights(), edges: self.edge_weights() }
    }
}

/// Tabulates `μ * γ_{0,t}` on `[min x − k√t, max x + k√t]`.
pub fn build_grid_density(
    mu: &AtomicMixingMeasure1D,
    t: f64,
    n_points: usize,
    window_sigmas: f64,
) -> Result<GridDensity1D> {
    build_grid_density_with(mu, t, &GridOptions { n_points, window_sigmas, ..GridOptions::default() })
}

pub fn build_grid_density_with(mu: &AtomicMixingMeasure1D, t: f64, opts: &GridOptions) -> Result<GridDensity1D> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Input(format!("t must be positive, got {t}")));
    }
    if opts.n_points < 3 {
        return Err(Error::Input(format!("need at least 3 grid points, got {}", opts.n_points)));
    }
    if !(opts.window_sigmas.is_finite() && opts.window_sigmas > 0.0) {
        return Err(Error::Input(format!("window_sigmas must be positive, got {}", opts.window_sigmas)));
    }
    let half = opts.window_sigmas * t.sqrt();
    let left = mu.min_location() - half;
    let right = mu.max_location() + half;
    let n = opts.n_points;
    let h = (right - left) / (n - 1) as f64;

    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let y = left + i as f64 * h;
        let v = mu.density(y, t);
        if v <= 0.0 || !v.is_finite() {
            return Err(Error::Underflow { node: i, y });
        }
        values.push(v);
    }
    let mut midpoint_values = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        let y = left + (j as f64 + 0.5) * h;
        let v = mu.density(y, t);
        if v <= 0.0 || !v.is_finite() {
            return Err(Error::Underflow { node: j, y });
        }
        midpoint_values.push(v);
    }
    let mut mass = CompensatedSum::new();
    for (i, v) in values.iter().enumerate() {
        let c = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        mass.add(c * h * v);
    }
    let total_mass = mass.value();
    let deficit = 1.0 - total_mass;
    if deficit.abs() > opts.mass_tol {
        return Err(Error::Truncation { deficit, tol: opts.mass_tol });
    }
    Ok(GridDensity1D {
        left,
        right,
        n_points: n,
        values,
        midpoint_values,
        t,
        total_mass,
        mass_tol: opts.mass_tol,
        source: mu.clone(),
    })
}

/// The discrete variance (mass) and Dirichlet (stiffness) forms of a grid.
///
/// `mass` holds the diagonal of `M`, `edges` the conductances of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletPair {
    pub mass: Vec<f64>,
    pub edges: Vec<f64>,
}

impl DirichletPair {
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        compensated_sum(self.mass.iter().zip(f).map(|(w, f)| w * f))
    }

    pub fn norm2(&self, f: &[f64]) -> f64 {
        compensated_sum(self.mass.iter().zip(f).map(|(w, f)| w * f * f))
    }

    pub fn variance(&self, f: &[f64]) -> f64 {
        crate::measures::variance_raw(&self.mass, f)
    }

    /// `fᵀ A f`.
    pub fn energy(&self, f: &[f64]) -> f64 {
        compensated_sum(self.edges.iter().zip(f.windows(2)).map(|(a, p)| a * (p[1] - p[0]) * (p[1] - p[0])))
    }

    /// `A f`.
    pub fn apply_stiffness(&self, f: &[f64], out: &mut [f64]) {
        let n = f.len();
        out.iter_mut().for_each(|o| *o = 0.0);
        for j in 0..n - 1 {
            let g = self.edges[j] * (f[j + 1] - f[j]);
            out[j] -= g;
            out[j + 1] += g;
        }
    }

    /// Removes the `M`-weighted mean.
    pub fn deflate(&self, f: &mut [f64]) {
        let m = self.mean(f);
        f.iter_mut().for_each(|v| *v -= m);
    }

    /// Solves `A x = b` for `Σ bᵢ = 0`, returning the `M`-mean-zero solution.
    ///
    /// The stiffness matrix is a weighted path Laplacian, so its fluxes
    /// `g_j = a_j (x_{j+1} − x_j)` are partial sums of `b`. Sums are taken from
    /// whichever end is closer to keep tail fluxes accurate.
    pub fn solve_stiffness(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mid = n / 2;
        let mut flux = vec![0.0; n - 1];
        let mut acc = CompensatedSum::new();
        for j in 0..mid.min(n - 1) {
            acc.add(-b[j]);
            flux[j] = acc.value();
        }
        let mut acc = CompensatedSum::new();
        for j in (mid..n - 1).rev() {
            acc.add(b[j + 1]);
            flux[j] = acc.value();
        }
        // Integrate outward from the heaviest node so that large tail values
        // never pass through the bulk.
        let anchor = self
            .mass
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, w)| if *w > best.1 { (i, *w) } else { best })
            .0;
        let mut x = vec![0.0; n];
        for j in anchor..n - 1 {
            x[j + 1] = x[j] + flux[j] / self.edges[j];
        }
        for j in (0..anchor).rev() {
            x[j] = x[j + 1] - flux[j] / self.edges[j];
        }
        self.deflate(&mut x);
        x
    }

    /// Solves `(A + εM) x = b` by the Thomas algorithm.
    pub fn solve_shifted(&self, eps: f64, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut diag: Vec<f64> = (0..n)
            .map(|i| {
                let left = if i > 0 { self.edges[i - 1] } else { 0.0 };
                let right = if i + 1 < n { self.edges[i] } else { 0.0 };
                left + right + eps * self.mass[i]
            })
            .collect();
        let mut rhs = b.to_vec();
        for i in 1..n {
            let m = -self.edges[i - 1] / diag[i - 1];
            diag[i] -= m * -self.edges[i - 1];
            rhs[i] -= m * rhs[i - 1];
        }
        let mut x = vec![0.0; n];
        x[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (rhs[i] + self.edges[i] * x[i + 1]) / diag[i];
        }
        x
    }
}

/// Convergence controls for the inverse iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative eigenvalue change that ends the iteration.
    pub rel_tol: f64,
    /// Relative residual `‖Av − λMv‖_{M⁻¹} / (λ‖v‖_M)` required on exit.
    pub residual_tol: f64,
    pub max_iters: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, residual_tol: 1e-6, max_iters: 10_000 }
    }
}

/// Estimate of `C_P = 1/λ₁` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenEstimate {
    /// Poincaré constant estimate `1/λ₁`.
    pub value: f64,
    pub eigenvalue: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Relative change of the estimate under grid doubling, when measured.
    pub grid_refinement_ratio: Option<f64>,
    /// `M`-normalized eigenfunction at the grid nodes.
    pub eigenfunction: Vec<f64>,
}

pub fn poincare_constant_estimate(rho: &GridDensity1D) -> Result<EigenEstimate> {
    poincare_constant_estimate_with(rho, &SolverOptions::default())
}

/// Inverse iteration on the pencil `(A, M)` restricted to the `M`-orthogonal
/// complement of the constants, started from `y − mean`.
pub fn poincare_constant_estimate_with(rho: &GridDensity1D, opts: &SolverOptions) -> Result<EigenEstimate> {
    let forms = rho.forms();
    let mut v = rho.nodes();
    forms.deflate(&mut v);
    normalize(&forms, &mut v);

    let mut lambda = forms.energy(&v);
    let mut change = f64::INFINITY;
    let mut residual = f64::INFINITY;
    let mut av = vec![0.0; v.len()];
    for iter in 1..=opts.max_iters {
        let mut b: Vec<f64> = forms.mass.iter().zip(&v).map(|(w, v)| w * v).collect();
        let s = compensated_sum(b.iter().copied());
        b.iter_mut().zip(&forms.mass).for_each(|(b, w)| *b -= w * s);
        let mut x = forms.solve_stiffness(&b);
        normalize(&forms, &mut x);
        let next = forms.energy(&x);
        change = (next - lambda).abs() / next;
        lambda = next;
        v = x;

        forms.apply_stiffness(&v, &mut av);
        let r2 = compensated_sum(
            av.iter().zip(&forms.mass).zip(&v).map(|((a, w), v)| (a - lambda * w * v).powi(2) / w),
        );
        residual = r2.sqrt() / lambda;
        if change <= opts.rel_tol && residual <= opts.residual_tol {
            return Ok(EigenEstimate {
                value: 1.0 / lambda,
                eigenvalue: lambda,
                residual_norm: residual,
                iterations: iter,
                grid_refinement_ratio: None,
                eigenfunction: v,
            });
        }
    }
    let _ = residual;
    Err(Error::Solver { iterations: opts.max_iters, last_change: change })
}

fn normalize(forms: &DirichletPair, f: &mut [f64]) {
    let n = forms.norm2(f).sqrt();
    f.iter_mut().for_each(|v| *v /= n);
}

/// Solves on `opts.n_points` and on the doubled grid `2n − 1`, and records
/// the relative change of the estimate.
pub fn poincare_estimate_with_refinement(
    mu: &AtomicMixingMeasure1D,
    t: f64,
    opts: &GridOptions,
) -> Result<EigenEstimate> {
    let coarse = poincare_constant_estimate(&build_grid_density_with(mu, t, opts)?)?;
    let fine_opts = GridOptions { n_points: 2 * opts.n_points - 1, ..*opts };
    let mut fine = poincare_constant_estimate(&build_grid_density_with(mu, t, &fine_opts)?)?;
    fine.grid_refinement_ratio = Some((fine.value - coarse.value) / fine.value);
    Ok(fine)
}

/// `var_ρ(f) / E_ρ|f′|²` under the discrete forms of the grid.
///
/// For every non-constant `f` this is at most the grid's `1/λ₁`.
pub fn rayleigh_quotient(rho: &GridDensity1D, f: &[f64]) -> Result<f64> {
    if f.len() != rho.n_points {
        return Err(Error::Input(format!("function has {} values, grid has {}", f.len(), rho.n_points)));
    }
    let forms = rho.forms();
    let energy = forms.energy(f);
    if energy <= 0.0 {
        return Err(Error::Degenerate("test function has zero Dirichlet energy".into()));
    }
    Ok(forms.variance(f) / energy)
}

/// One row of a grid-refinement table.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementRow {
    pub n_points: usize,
    pub spacing: f64,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<RefinementRow>,
    /// Observed order from the three finest grids.
    pub observed_order: Option<f64>,
    /// Richardson-extrapolated limit.
    pub extrapolated: f64,
    /// Differences did not shrink monotonically with the same sign.
    pub non_monotone: bool,
}

/// Estimates on each grid of `n_list` plus a Richardson extrapolation.
///
/// The finest three grids give the observed order `p`; the limit is
/// `e_fine + (e_fine − e_prev)/(r^p − 1)` with spacing ratio `r`. With fewer
/// than three grids, or an unusable observed order, the formal order 2 is used.
pub fn grid_refinement_study(
    mu: &AtomicMixingMeasure1D,
    t: f64,
    n_list: &[usize],
    window_sigmas: f64,
) -> Result<ConvergenceTable> {
    if n_list.is_empty() {
        return Err(Error::Input("empty grid list".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("grid sizes must be strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let grid = build_grid_density(mu, t, n, window_sigmas)?;
        let est = poincare_constant_estimate(&grid)?;
        rows.push(RefinementRow { n_points: n, spacing: grid.spacing(), estimate: est.value });
    }
    let diffs: Vec<f64> = rows.windows(2).map(|w| w[1].estimate - w[0].estimate).collect();
    let non_monotone = diffs.windows(2).any(|d| d[0] * d[1] < 0.0 || d[1].abs() > d[0].abs());

    let k = rows.len();
    let observed_order = (k >= 3)
        .then(|| {
            let (a, b, c) = (&rows[k - 3], &rows[k - 2], &rows[k - 1]);
            let ratio = b.spacing / c.spacing;
            let p = ((b.estimate - a.estimate) / (c.estimate - b.estimate)).ln() / ratio.ln();
            p.is_finite().then_some(p)
        })
        .flatten();
    let extrapolated = if k >= 2 {
        let (b, c) = (&rows[k - 2], &rows[k - 1]);
        let ratio = b.spacing / c.spacing;
        let p = observed_order.filter(|p| *p > 0.5 && *p < 4.0).unwrap_or(2.0);
        c.estimate + (c.estimate - b.estimate) / (ratio.powf(p) - 1.0)
    } else {
        rows[0].estimate
    };
    Ok(ConvergenceTable { rows, observed_order, extrapolated, non_monotone })
}
