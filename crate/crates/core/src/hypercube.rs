//! Exact constants for Bernoulli-product mixtures on `{0,1}ⁿ`.
//!
//! States are `n`-bit masks enumerated in increasing order; bit `i` of a mask
//! is coordinate `i`. The component at `x` is `⊗ᵢ π_{xᵢ}` with
//! `π₀ = Bernoulli(p)` and `π₁ = Bernoulli(1−p)`, and `Γ(f) = Σᵢ (Dᵢf)²` uses
//! the coordinate increments.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::Rng;

use crate::ascent::{self, AscentOptions, QuotientModel};
use crate::bounds::{self, BoundReport, DualExponent, MixtureBoundInputs};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::measures::{self, DiscreteFunction, DiscreteMeasure, StateId};
use crate::sampling::random_simplex;
use crate::summation::compensated_sum;

pub const MAX_DIMENSION: u32 = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct HypercubeInstance {
    n: u32,
    p: f64,
    mu: DiscreteMeasure,
    diameter: u32,
}

impl HypercubeInstance {
    /// `mu` is a measure whose states are `n`-bit masks.
    pub fn new(n: u32, p: f64, mu: DiscreteMeasure) -> Result<Self> {
        if n == 0 || n > MAX_DIMENSION {
            return Err(Error::Size(format!("dimension must lie in [1, {MAX_DIMENSION}], got {n}")));
        }
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::Domain(format!("Bernoulli parameter must lie in (0, ½), got {p}")));
        }
        if let Some(s) = mu.states().iter().find(|s| **s >> n != 0) {
            return Err(Error::Input(format!("atom {s:#b} is not an {n}-bit string")));
        }
        let diameter = hamming_diameter(&mu);
        Ok(Self { n, p, mu, diameter })
    }

    /// Atoms given as strings of `0`/`1`; character `i` is coordinate `i`.
    pub fn from_bitstrings(p: f64, atoms: &[(&str, f64)]) -> Result<Self> {
        let n = atoms.first().map_or(0, |a| a.0.len());
        let mut states = Vec::with_capacity(atoms.len());
        for (bits, _) in atoms {
            if bits.len() != n {
                return Err(Error::Input(format!("bitstring {bits:?} has length {}, expected {n}", bits.len())));
            }
            states.push(parse_bits(bits)?);
        }
        let mu = DiscreteMeasure::new(states, atoms.iter().map(|a| a.1).collect())?;
        Self::new(n as u32, p, mu)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn mu(&self) -> &DiscreteMeasure {
        &self.mu
    }

    /// Hamming diameter of the support of `μ`.
    pub fn diameter(&self) -> u32 {
        self.diameter
    }

    /// Same atoms with coordinates relabelled: coordinate `i` moves to `perm[i]`.
    pub fn permuted(&self, perm: &[u32]) -> Result<Self> {
        let mut seen = vec![false; self.n as usize];
        if perm.len() != self.n as usize || perm.iter().any(|&j| j >= self.n || std::mem::replace(&mut seen[j as usize], true)) {
            return Err(Error::Input(format!("{perm:?} is not a permutation of 0..{}", self.n)));
        }
        let states = self.mu.states().iter().map(|&s| permute_bits(s, perm)).collect();
        Self::new(self.n, self.p, DiscreteMeasure::new(states, self.mu.weights().to_vec())?)
    }

    /// Every atom with all bits flipped.
    pub fn flipped(&self) -> Result<Self> {
        let full = full_mask(self.n);
        let states = self.mu.states().iter().map(|s| s ^ full).collect();
        Self::new(self.n, self.p, DiscreteMeasure::new(states, self.mu.weights().to_vec())?)
    }

    /// The same atoms viewed in `{0,1}^m` for `m ≥ n`, padded with zero bits.
    pub fn embedded(&self, m: u32) -> Result<Self> {
        if m < self.n {
            return Err(Error::Input(format!("cannot embed dimension {} into {m}", self.n)));
        }
        Self::new(m, self.p, self.mu.clone())
    }

    /// `0`/`1` string of an atom.
    pub fn bitstring(&self, state: StateId) -> String {
        (0..self.n).map(|i| if state >> i & 1 == 1 { '1' } else { '0' }).collect()
    }
}

fn parse_bits(bits: &str) -> Result<StateId> {
    if bits.is_empty() || bits.len() > MAX_DIMENSION as usize {
        return Err(Error::Input(format!("bitstring {bits:?} must have 1 to {MAX_DIMENSION} characters")));
    }
    bits.chars().enumerate().try_fold(0, |acc, (i, c)| match c {
        '0' => Ok(acc),
        '1' => Ok(acc | 1 << i),
        _ => Err(Error::Input(format!("bitstring {bits:?} contains {c:?}"))),
    })
}

fn full_mask(n: u32) -> StateId {
    (1 << n) - 1
}

fn permute_bits(s: StateId, perm: &[u32]) -> StateId {
    perm.iter().enumerate().fold(0, |acc, (i, &j)| acc | (s >> i & 1) << j)
}

fn hamming(a: StateId, b: StateId) -> u32 {
    (a ^ b).count_ones()
}

fn support(mu: &DiscreteMeasure) -> impl Iterator<Item = StateId> + '_ {
    mu.states().iter().zip(mu.weights()).filter(|(_, w)| **w > 0.0).map(|(s, _)| *s)
}

fn hamming_diameter(mu: &DiscreteMeasure) -> u32 {
    let atoms: Vec<StateId> = support(mu).collect();
    atoms
        .iter()
        .flat_map(|a| atoms.iter().map(move |b| hamming(*a, *b)))
        .max()
        .unwrap_or(0)
}

/// `(μP)(y) = Σₓ μ(x) Πᵢ π_{xᵢ}(yᵢ)` on all `2ⁿ` states.
pub fn mixture_distribution(inst: &HypercubeInstance) -> Result<DiscreteMeasure> {
    if inst.n > MAX_DIMENSION {
        return Err(Error::Size(format!("dimension {} exceeds {MAX_DIMENSION}", inst.n)));
    }
    let n = inst.n;
    let (lp, lq) = (inst.p.ln(), (-inst.p).ln_1p());
    let atoms: Vec<(StateId, f64)> = inst.mu.states().iter().copied().zip(inst.mu.weights().iter().copied()).collect();
    let weights: Vec<f64> = (0..1u64 << n)
        .map(|y| {
            compensated_sum(atoms.iter().map(|&(x, w)| {
                let d = f64::from(hamming(x, y));
                w * (d * lp + (f64::from(n) - d) * lq).exp()
            }))
        })
        .collect();
    let total = compensated_sum(weights.iter().copied());
    DiscreteMeasure::from_weights(weights.into_iter().map(|w| w / total).collect())
}

fn dimension_of(len: usize) -> Result<u32> {
    if len < 2 || !len.is_power_of_two() || len.trailing_zeros() > MAX_DIMENSION {
        return Err(Error::Input(format!("{len} states is not 2ⁿ for n in [1, {MAX_DIMENSION}]")));
    }
    Ok(len.trailing_zeros())
}

fn check_cube_measure(rho: &DiscreteMeasure) -> Result<u32> {
    let n = dimension_of(rho.len())?;
    if rho.states().iter().enumerate().any(|(i, s)| *s != i as StateId) {
        return Err(Error::Input("hypercube measures must list states 0..2ⁿ in order".into()));
    }
    Ok(n)
}

/// Edges `(y, y + eᵢ)` with conductance `ρ(y) + ρ(y + eᵢ)`.
fn edges(rho: &[f64], n: u32) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::with_capacity(rho.len() * n as usize / 2);
    for y in 0..rho.len() {
        for i in 0..n {
            let bit = 1 << i;
            if y & bit == 0 {
                out.push((y, y | bit, rho[y] + rho[y | bit]));
            }
        }
    }
    out
}

fn edge_energy(edges: &[(usize, usize, f64)], f: &[f64]) -> f64 {
    compensated_sum(edges.iter().map(|&(a, b, c)| c * (f[b] - f[a]).powi(2)))
}

/// `E_ρ Γ(f) = Σ_y ρ(y) Σᵢ (f(y, yᵢ=1) − f(y, yᵢ=0))²`.
pub fn discrete_dirichlet_form(rho: &DiscreteMeasure, f: &DiscreteFunction) -> Result<f64> {
    let n = check_cube_measure(rho)?;
    if f.len() != rho.len() {
        return Err(Error::Input(format!("function has {} values, measure has {}", f.len(), rho.len())));
    }
    Ok(edge_energy(&edges(rho.weights(), n), f.values()))
}

fn laplacian(n_states: usize, edges: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n_states, n_states);
    for &(a, b, c) in edges {
        l[(a, a)] += c;
        l[(b, b)] += c;
        l[(a, b)] -= c;
        l[(b, a)] -= c;
    }
    l
}

fn strictly_positive(rho: &DiscreteMeasure) -> Result<()> {
    if rho.weights().iter().any(|w| !(*w > 0.0)) {
        return Err(Error::Input("hypercube measure must be strictly positive".into()));
    }
    Ok(())
}

fn variance_of(w: &[f64], f: &[f64]) -> f64 {
    let m = compensated_sum(w.iter().zip(f).map(|(w, f)| w * f));
    compensated_sum(w.iter().zip(f).map(|(w, f)| w * (f - m).powi(2)))
}

/// Relative change in the Rayleigh quotient at which inverse iteration stops.
const EIGEN_REL_TOL: f64 = 1e-14;
const EIGEN_MAX_ITERS: usize = 20_000;

/// Optimal Poincaré constant `sup var_ρ(f) / E_ρΓ(f)`.
///
/// Inverse iteration with the Cholesky factor of `L + ρρᵀ`, which is SPD and
/// agrees with the Dirichlet matrix `L` on `ρ`-mean-zero vectors. Falls back to
/// [`exact_poincare_dense`] when iteration stalls and `n ≤ 8`.
pub fn exact_poincare(rho: &DiscreteMeasure) -> Result<f64> {
    poincare_pair(rho).map(|(c, _)| c)
}

/// Poincaré constant and a maximizing function.
pub fn poincare_pair(rho: &DiscreteMeasure) -> Result<(f64, Vec<f64>)> {
    let n = check_cube_measure(rho)?;
    strictly_positive(rho)?;
    let w = rho.weights();
    let es = edges(w, n);
    let mut a = laplacian(w.len(), &es);
    let rv = DVector::from_column_slice(w);
    a += &rv * rv.transpose();
    let chol = Cholesky::new(a).ok_or(Error::Solver { iterations: 0, last_change: f64::NAN })?;

    let deflate = |x: &mut DVector<f64>| {
        let m = compensated_sum(w.iter().zip(x.iter()).map(|(w, x)| w * x));
        x.add_scalar_mut(-m);
    };
    // Start from the sum of coordinate functions plus a bit of parity so no
    // symmetric eigenspace is missed.
    let mut x = DVector::from_iterator(
        w.len(),
        (0..w.len()).map(|y| y.count_ones() as f64 + 0.1 * (y as f64 * 0.7).sin()),
    );
    deflate(&mut x);
    let mut q = 0.0;
    let mut last_change = f64::INFINITY;
    for it in 0..EIGEN_MAX_ITERS {
        let b = DVector::from_iterator(w.len(), w.iter().zip(x.iter()).map(|(w, x)| w * x));
        let mut y = chol.solve(&b);
        deflate(&mut y);
        let scale = y.amax();
        if !(scale > 0.0) {
            return Err(Error::Solver { iterations: it, last_change });
        }
        y /= scale;
        let qn = variance_of(w, y.as_slice()) / edge_energy(&es, y.as_slice());
        last_change = (qn - q).abs() / qn;
        x = y;
        q = qn;
        if last_change <= EIGEN_REL_TOL {
            return Ok((q, x.as_slice().to_vec()));
        }
    }
    if n <= 8 {
        return dense_pair(rho);
    }
    Err(Error::Solver { iterations: EIGEN_MAX_ITERS, last_change })
}

/// Dense route: the largest eigenvalue of `W^{1/2} L⁺ W^{1/2}`, computed as
/// the reciprocal of the second-smallest eigenvalue of `W^{-1/2} L W^{-1/2}`.
pub fn exact_poincare_dense(rho: &DiscreteMeasure) -> Result<f64> {
    dense_pair(rho).map(|(c, _)| c)
}

fn dense_pair(rho: &DiscreteMeasure) -> Result<(f64, Vec<f64>)> {
    let n = check_cube_measure(rho)?;
    strictly_positive(rho)?;
    let w = rho.weights();
    let mut m = laplacian(w.len(), &edges(w, n));
    let s: Vec<f64> = w.iter().map(|w| w.sqrt()).collect();
    for i in 0..w.len() {
        for j in 0..w.len() {
            m[(i, j)] /= s[i] * s[j];
        }
    }
    // Lift the null vector √ρ above the spectrum so it cannot be selected.
    let sv = DVector::from_column_slice(&s);
    let lift = m.norm() + 1.0;
    m += lift * &sv * sv.transpose();
    let eig = SymmetricEigen::<f64, Dyn>::new(m);
    let (idx, lambda) = eig.eigenvalues.iter().copied().enumerate().fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    if !(lambda > 0.0) {
        return Err(Error::Solver { iterations: 0, last_change: lambda });
    }
    let v = eig.eigenvectors.column(idx);
    Ok((1.0 / lambda, v.iter().zip(&s).map(|(v, s)| v / s).collect()))
}

struct CubeModel {
    weights: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
    /// `L + W`.
    metric_matrix: DMatrix<f64>,
    metric: Cholesky<f64, Dyn>,
}

impl CubeModel {
    fn new(rho: &DiscreteMeasure) -> Result<Self> {
        let n = check_cube_measure(rho)?;
        strictly_positive(rho)?;
        let weights = rho.weights().to_vec();
        let edges = edges(&weights, n);
        let mut a = laplacian(weights.len(), &edges);
        for (i, w) in weights.iter().enumerate() {
            a[(i, i)] += w;
        }
        let metric = Cholesky::new(a.clone()).ok_or(Error::Solver { iterations: 0, last_change: f64::NAN })?;
        Ok(Self { weights, edges, metric_matrix: a, metric })
    }

    /// Hessian of `N/(2E)` with `N = ent_w(f²)` and `E = fᵀLf`.
    fn quotient_hessian(&self, f: &[f64], q: f64, grad_n: &DVector<f64>) -> DMatrix<f64> {
        let w = &self.weights;
        let len = w.len();
        let s = compensated_sum(w.iter().zip(f).map(|(w, f)| w * f * f));
        let log_s = s.ln();
        let energy = self.energy(f);
        let n_val = 2.0 * energy * q;
        let lap = &self.metric_matrix - DMatrix::from_diagonal(&DVector::from_column_slice(w));
        let fv = DVector::from_column_slice(f);
        let grad_e = 2.0 * &lap * &fv;
        let wf = DVector::from_iterator(len, w.iter().zip(f).map(|(w, f)| w * f));
        let mut h_n = -4.0 / s * &wf * wf.transpose();
        for i in 0..len {
            let sq = (f[i] * f[i]).max(1e-300);
            h_n[(i, i)] += 2.0 * w[i] * (sq.ln() - log_s + 2.0);
        }
        let cross = grad_n * grad_e.transpose();
        h_n / (2.0 * energy) - (&cross + cross.transpose()) / (2.0 * energy * energy) - (n_val / (energy * energy)) * lap
            + (n_val / energy.powi(3)) * &grad_e * grad_e.transpose()
    }

    /// Damped Newton direction `(λM − H)⁻¹ ∇Q` with the smallest `λ` on a
    /// decade ladder that makes the matrix positive definite.
    fn newton_direction(&self, f: &[f64], q: f64, grad: &[f64]) -> Option<Vec<f64>> {
        let w = &self.weights;
        let s = compensated_sum(w.iter().zip(f).map(|(w, f)| w * f * f));
        let log_s = s.ln();
        let grad_n = DVector::from_iterator(
            w.len(),
            w.iter().zip(f).map(|(w, f)| {
                let sq = f * f;
                if sq == 0.0 { 0.0 } else { 2.0 * w * f * (sq.ln() - log_s) }
            }),
        );
        let neg_h = -self.quotient_hessian(f, q, &grad_n);
        let scale = neg_h.diagonal().abs().mean() / self.metric_matrix.diagonal().mean();
        let g = DVector::from_column_slice(grad);
        (-12..=4).find_map(|e| {
            let lambda = scale * 10f64.powi(e);
            let chol = Cholesky::new(&neg_h + lambda * &self.metric_matrix)?;
            Some(chol.solve(&g).as_slice().to_vec())
        })
    }
}

/// Largest state count for which restarts are finished with Newton steps.
const NEWTON_MAX_STATES: usize = 512;
const NEWTON_MAX_ITERS: usize = 60;

impl QuotientModel for CubeModel {
    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn energy(&self, f: &[f64]) -> f64 {
        edge_energy(&self.edges, f)
    }

    fn energy_gradient(&self, f: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for &(a, b, c) in &self.edges {
            let g = 2.0 * c * (f[a] - f[b]);
            out[a] += g;
            out[b] -= g;
        }
    }

    // (L + W)⁻¹ g
    fn precondition(&self, g: &[f64]) -> Vec<f64> {
        self.metric.solve(&DVector::from_column_slice(g)).as_slice().to_vec()
    }
}

/// A lower bound on `C_LS(ρ)` and the function attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct HypercubeLsiBound {
    pub value: f64,
    /// Best ascent iterate. When `poincare_limit` is set this is `1 + εφ`
    /// for the Poincaré eigenfunction `φ`, whose quotient tends to `C_P` as
    /// `ε → 0`.
    pub witness: DiscreteFunction,
    pub restart_values: Vec<f64>,
    /// The value is the exact `C_P`, which no ascent iterate exceeded.
    pub poincare_limit: bool,
}

/// `ent_ρ(f²) / (2 E_ρΓ(f))`.
pub fn hypercube_lsi_quotient(rho: &DiscreteMeasure, f: &DiscreteFunction) -> Result<f64> {
    let n = check_cube_measure(rho)?;
    if f.len() != rho.len() {
        return Err(Error::Input(format!("function has {} values, measure has {}", f.len(), rho.len())));
    }
    let energy = edge_energy(&edges(rho.weights(), n), f.values());
    if !(energy > 0.0) {
        return Err(Error::Degenerate("function is constant".into()));
    }
    let squares: Vec<f64> = f.values().iter().map(|v| v * v).collect();
    Ok(measures::entropy_raw(rho.weights(), &squares) / (2.0 * energy))
}

/// Seeds `1 ± ½ s` for each coordinate sign `s(y) = ±1`.
fn coordinate_seeds(n: u32) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..n {
        for sign in [1.0, -1.0] {
            out.push(
                (0..1usize << n)
                    .map(|y| 1.0 + sign * 0.5 * if y >> i & 1 == 1 { 1.0 } else { -1.0 })
                    .collect(),
            );
        }
    }
    out
}

/// Seeds `1 ± ½ s` where `s` says which of the two farthest atoms of `μ` is
/// nearer (0 on ties).
fn support_seeds(inst: &HypercubeInstance) -> Vec<Vec<f64>> {
    let atoms: Vec<StateId> = support(&inst.mu).collect();
    let Some((a, b)) = atoms
        .iter()
        .flat_map(|a| atoms.iter().map(move |b| (*a, *b)))
        .max_by_key(|(a, b)| hamming(*a, *b))
        .filter(|(a, b)| a != b)
    else {
        return Vec::new();
    };
    [1.0, -1.0]
        .iter()
        .map(|sign| {
            (0..1 << inst.n)
                .map(|y: StateId| {
                    let s = (f64::from(hamming(y, b)) - f64::from(hamming(y, a))).signum();
                    1.0 + sign * 0.5 * if hamming(y, a) == hamming(y, b) { 0.0 } else { s }
                })
                .collect()
        })
        .collect()
}

/// Ascent over `f ∈ ℝ^{2ⁿ}` from coordinate-split seeds, the Poincaré
/// eigenfunction, any `extra_starts`, and `opts.restarts` seeded random
/// starts. On up to 512 states each run is finished with damped Newton
/// steps under the same increase-only line search. Never returns less than the exact `C_P`, which is the limit of
/// the quotient along `1 + εφ`.
pub fn lsi_lower_bound_hypercube_with(
    rho: &DiscreteMeasure,
    extra_starts: Vec<Vec<f64>>,
    opts: &AscentOptions,
) -> Result<HypercubeLsiBound> {
    let model = CubeModel::new(rho)?;
    let n = dimension_of(rho.len())?;
    let (c_p, phi) = poincare_pair(rho)?;
    let phi_scale = phi.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let mut starts = coordinate_seeds(n);
    for sign in [1.0, -1.0] {
        starts.push(phi.iter().map(|v| 1.0 + sign * 0.5 * v / phi_scale).collect());
    }
    starts.extend(extra_starts);
    let mut rng = ascent::restart_rng(opts.seed);
    for _ in 0..opts.restarts {
        let noise = ascent::noise(&mut rng, rho.len());
        starts.push(noise.into_iter().map(|e| 1.0 + 0.5 * e).collect());
    }
    let mut best: Option<ascent::AscentTrace> = None;
    let mut restart_values = Vec::with_capacity(starts.len());
    for start in starts {
        let Ok(mut trace) = ascent::ascend(&model, start, opts.max_iters, opts.rel_tol) else {
            continue;
        };
        if rho.len() <= NEWTON_MAX_STATES {
            let polished = ascent::ascend_along(&model, trace.witness.clone(), NEWTON_MAX_ITERS, 0.0, |f, q, g| {
                model.newton_direction(f, q, g)
            })?;
            if polished.best() > trace.best() {
                trace.values.extend_from_slice(&polished.values[1..]);
                trace.witness = polished.witness;
            }
        }
        restart_values.push(trace.best());
        if best.as_ref().is_none_or(|b| trace.best() > b.best()) {
            best = Some(trace);
        }
    }
    let trace = best.ok_or_else(|| Error::Optimization("every restart was degenerate".into()))?;
    let witness = DiscreteFunction::new(trace.witness)?;
    let value = hypercube_lsi_quotient(rho, &witness)?;
    if value >= c_p {
        return Ok(HypercubeLsiBound { value, witness, restart_values, poincare_limit: false });
    }
    let near_constant = phi.iter().map(|v| 1.0 + 1e-6 * v / phi_scale).collect();
    Ok(HypercubeLsiBound {
        value: c_p,
        witness: DiscreteFunction::new(near_constant)?,
        restart_values,
        poincare_limit: true,
    })
}

pub fn lsi_lower_bound_hypercube(rho: &DiscreteMeasure, restarts: usize, max_iters: usize) -> Result<HypercubeLsiBound> {
    lsi_lower_bound_hypercube_with(rho, Vec::new(), &hypercube_ascent_options(restarts, max_iters))
}

/// Ascent defaults used for hypercube instances: tighter stopping than the
/// grid case since the quotient is exact.
pub fn hypercube_ascent_options(restarts: usize, max_iters: usize) -> AscentOptions {
    AscentOptions { restarts, max_iters, rel_tol: 1e-13, seed: 0 }
}

/// [`lsi_lower_bound_hypercube_with`] on `μP`, adding seeds split along the
/// support of `μ`.
pub fn lsi_lower_bound_instance(inst: &HypercubeInstance, opts: &AscentOptions) -> Result<HypercubeLsiBound> {
    lsi_lower_bound_hypercube_with(&mixture_distribution(inst)?, support_seeds(inst), opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KConstants {
    /// `1 + max χ²(P_x ‖ P_x')` over the support.
    pub k_inf: f64,
    pub k_p: Vec<(DualExponent, f64)>,
    /// `(1 + K_χ²(π))^k − 1` for Hamming diameter `k`.
    pub diameter_bound: f64,
    /// Pairwise `χ²(P_x ‖ P_x')` over the atoms of `μ`.
    pub pairwise: Vec<Vec<ExtendedReal>>,
}

impl KConstants {
    pub fn k_for(&self, e: DualExponent) -> Option<f64> {
        self.k_p.iter().find(|(x, _)| *x == e).map(|(_, v)| *v)
    }
}

/// Pairwise χ² between components by tensorization, and the resulting
/// `K_{p,χ²}` for each requested exponent.
pub fn exact_k_constants(inst: &HypercubeInstance, exponents: &[DualExponent]) -> Result<KConstants> {
    let (_, k_chi2) = bounds::bernoulli_pi_constants(inst.p)?;
    let states = inst.mu.states();
    let pairwise: Vec<Vec<ExtendedReal>> = states
        .iter()
        .map(|&a| {
            states
                .iter()
                .map(|&b| {
                    let per_coord: Vec<ExtendedReal> = (0..inst.n)
                        .map(|i| ExtendedReal::Finite(if (a ^ b) >> i & 1 == 1 { k_chi2 } else { 0.0 }))
                        .collect();
                    bounds::chi2_tensorize(&per_coord)
                })
                .collect()
        })
        .collect();
    let finite = |v: ExtendedReal| v.finite().ok_or_else(|| Error::Domain("χ² between Bernoulli products is finite".into()));
    let k_inf = finite(measures::k_p_chi2_discrete(&inst.mu, &pairwise, DualExponent::infinity())?)?;
    let k_p = exponents
        .iter()
        .map(|&e| Ok((e, finite(measures::k_p_chi2_discrete(&inst.mu, &pairwise, e)?)?)))
        .collect::<Result<_>>()?;
    let diameter_bound = (f64::from(inst.diameter) * k_chi2.ln_1p()).exp_m1();
    Ok(KConstants { k_inf, k_p, diameter_bound, pairwise })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactConstants {
    pub c_p_exact: f64,
    pub c_ls_lower: f64,
    pub k_p_chi2_exact: Vec<(DualExponent, f64)>,
    pub k_inf_chi2_exact: f64,
}

pub fn exact_constants(inst: &HypercubeInstance, exponents: &[DualExponent], opts: &AscentOptions) -> Result<ExactConstants> {
    let rho = mixture_distribution(inst)?;
    let k = exact_k_constants(inst, exponents)?;
    Ok(ExactConstants {
        c_p_exact: exact_poincare(&rho)?,
        c_ls_lower: lsi_lower_bound_instance(inst, opts)?.value,
        k_p_chi2_exact: k.k_p,
        k_inf_chi2_exact: k.k_inf,
    })
}

/// Outcome of checking the mixture theorem on one instance and exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem31Check {
    pub exponent: DualExponent,
    pub c_p_exact: f64,
    pub c_ls_lower: f64,
    pub poincare_bound: BoundReport,
    pub lsi_bound: BoundReport,
    /// `C + C_P(D/2 + 1)` with `C = 2p*K_LS`, `D = p* log K_{p,χ²}`.
    pub tightened: BoundReport,
    pub poincare_pass: bool,
    pub lsi_pass: bool,
    pub tightened_pass: bool,
}

impl Theorem31Check {
    pub fn all_pass(&self) -> bool {
        self.poincare_pass && self.lsi_pass && self.tightened_pass
    }
}

/// Checks `C_P ≤` the Poincaré bound, the certified LSI lower bound `≤` the
/// LSI bound, and the lower bound `≤` the tightened defective LSI, all with
/// exact `K_{p,χ²}` and `K_P = K_LS = K_LS(Bernoulli(p))`.
pub fn validate_theorem31(inst: &HypercubeInstance, exponents: &[DualExponent], opts: &AscentOptions) -> Result<Vec<Theorem31Check>> {
    let rho = mixture_distribution(inst)?;
    let c_p = exact_poincare(&rho)?;
    let c_ls = lsi_lower_bound_instance(inst, opts)?.value;
    let (k_ls, _) = bounds::bernoulli_pi_constants(inst.p)?;
    let k = exact_k_constants(inst, exponents)?;
    k.k_p
        .iter()
        .map(|&(e, kp)| {
            let inputs = MixtureBoundInputs::new(k_ls, kp, e);
            let pi = bounds::poincare_mixture_bound(&inputs)?;
            let lsi = bounds::lsi_mixture_bound(&inputs)?;
            let ps = e.p_star();
            let tightened = bounds::tighten_defective_lsi_report(2.0 * ps * k_ls, ps * kp.ln(), c_p)?;
            Ok(Theorem31Check {
                exponent: e,
                c_p_exact: c_p,
                c_ls_lower: c_ls,
                poincare_pass: ExtendedReal::Finite(c_p) <= pi.bound_value,
                lsi_pass: ExtendedReal::Finite(c_ls) <= lsi.bound_value,
                tightened_pass: ExtendedReal::Finite(c_ls) <= tightened.bound_value,
                poincare_bound: pi,
                lsi_bound: lsi,
                tightened,
            })
        })
        .collect()
}

/// A random instance: `n ∈ [1, max_n]`, `p` from `ps`, and up to
/// `max_atoms` distinct atoms with Dirichlet weights.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, max_n: u32, ps: &[f64], max_atoms: usize) -> Result<HypercubeInstance> {
    let n = rng.random_range(1..=max_n);
    let p = ps[rng.random_range(0..ps.len())];
    let cap = max_atoms.min(1 << n).max(1);
    let count = rng.random_range(1..=cap);
    let mut states: Vec<StateId> = Vec::with_capacity(count);
    while states.len() < count {
        let s = rng.random_range(0..1u64 << n);
        if !states.contains(&s) {
            states.push(s);
        }
    }
    let weights = random_simplex(rng, count);
    HypercubeInstance::new(n, p, DiscreteMeasure::new(states, weights)?)
}

/// `½δ_{0ᵏ0^{n−k}} + ½δ_{1ᵏ0^{n−k}}`.
pub fn two_point_instance(n: u32, k: u32, p: f64) -> Result<HypercubeInstance> {
    if k == 0 || k > n {
        return Err(Error::Input(format!("diameter {k} must lie in [1, {n}]")));
    }
    HypercubeInstance::new(n, p, DiscreteMeasure::new(vec![0, full_mask(k)], vec![0.5, 0.5])?)
}
