//! Gradient ascent on the log-Sobolev quotient `ent_w(f²) / (2 E(f))`.
//!
//! Shared by the grid (1-d) and hypercube estimators. A model supplies the
//! probability weights `w`, a quadratic Dirichlet energy `E`, and a
//! preconditioner (an SPD approximation of the inverse Hessian metric). The
//! gradient is that of the discrete objective itself, so every accepted
//! iterate is a valid lower bound on the discrete LSI constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measures::entropy_raw;
use crate::summation::compensated_sum;

/// `f²` below this is treated as `0` inside logarithms.
const SQUARE_FLOOR: f64 = 1e-300;

pub trait QuotientModel {
    /// Probability weights of the reference measure.
    fn weights(&self) -> &[f64];

    /// Dirichlet energy `E_ρ Γ(f)`.
    fn energy(&self, f: &[f64]) -> f64;

    /// Gradient of [`QuotientModel::energy`] with respect to node values.
    fn energy_gradient(&self, f: &[f64], out: &mut [f64]);

    /// Maps a gradient to an ascent direction.
    fn precondition(&self, g: &[f64]) -> Vec<f64>;
}

/// `ent_w(f²) / (2 E(f))`, or `None` when the energy vanishes.
pub fn lsi_quotient_of<M: QuotientModel + ?Sized>(model: &M, f: &[f64]) -> Option<f64> {
    let energy = model.energy(f);
    if !(energy > 0.0) || !energy.is_finite() {
        return None;
    }
    let squares: Vec<f64> = f.iter().map(|v| v * v).collect();
    let q = entropy_raw(model.weights(), &squares) / (2.0 * energy);
    q.is_finite().then_some(q)
}

pub(crate) fn quotient_gradient<M: QuotientModel + ?Sized>(model: &M, f: &[f64], q: f64) -> Vec<f64> {
    let w = model.weights();
    let energy = model.energy(f);
    let s = compensated_sum(w.iter().zip(f).map(|(w, f)| w * f * f));
    let log_s = s.ln();
    let mut grad_e = vec![0.0; f.len()];
    model.energy_gradient(f, &mut grad_e);
    // ∂ ent(f²)/∂fᵢ = 2 wᵢ fᵢ (log fᵢ² − log S); ∂Q = ∂N/(2E) − Q ∂E/E
    w.iter()
        .zip(f)
        .zip(&grad_e)
        .map(|((w, f), ge)| {
            let sq = f * f;
            let dn = if sq == 0.0 { 0.0 } else { 2.0 * w * f * (sq.max(SQUARE_FLOOR).ln() - log_s) };
            dn / (2.0 * energy) - q * ge / energy
        })
        .collect()
}

fn normalize(w: &[f64], f: &mut [f64]) -> bool {
    let n = compensated_sum(w.iter().zip(f.iter()).map(|(w, f)| w * f * f)).sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return false;
    }
    f.iter_mut().for_each(|v| *v /= n);
    true
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Relative quotient change below which an ascent stops.
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self { restarts: 8, max_iters: 2000, rel_tol: 1e-9, seed: 0 }
    }
}

/// Outcome of one ascent run.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentTrace {
    /// Quotient after every accepted step, starting with the initial value.
    pub values: Vec<f64>,
    /// Final iterate, normalized to `E_w f² = 1`.
    pub witness: Vec<f64>,
    pub converged: bool,
}

impl AscentTrace {
    pub fn best(&self) -> f64 {
        *self.values.last().expect("trace holds the initial value")
    }
}

/// Iterates with `max f − min f` below this fraction of `max |f|` are
/// rejected: rounding dominates the quotient of nearly constant functions.
pub const MIN_RELATIVE_SPREAD: f64 = 1e-4;

fn spread_ok(f: &[f64]) -> bool {
    let (lo, hi, big) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY, 0.0f64), |(lo, hi, big), v| {
        (lo.min(*v), hi.max(*v), big.max(v.abs()))
    });
    hi - lo >= MIN_RELATIVE_SPREAD * big
}

/// Halvings tried before a step is abandoned.
const MAX_HALVINGS: usize = 60;

/// Preconditioned gradient ascent from `start`.
///
/// Each step moves along the preconditioned gradient, rescaled to unit
/// `w`-norm, with step length halved from 1 until the quotient increases.
/// Iterates are projected back to the unit sphere `E_w f² = 1`.
pub fn ascend<M: QuotientModel + ?Sized>(
    model: &M,
    start: Vec<f64>,
    max_iters: usize,
    rel_tol: f64,
) -> Result<AscentTrace> {
    let w = model.weights();
    ascend_along(model, start, max_iters, rel_tol, |_, _, grad| {
        let mut dir = model.precondition(grad);
        normalize(w, &mut dir).then_some(dir)
    })
}

/// [`ascend`] with a caller-supplied search direction. `direction` receives
/// the current iterate, its quotient and the quotient gradient, and returns
/// `None` to stop.
pub fn ascend_along<M, D>(model: &M, start: Vec<f64>, max_iters: usize, rel_tol: f64, mut direction: D) -> Result<AscentTrace>
where
    M: QuotientModel + ?Sized,
    D: FnMut(&[f64], f64, &[f64]) -> Option<Vec<f64>>,
{
    let w = model.weights();
    let mut f = start;
    if f.len() != w.len() {
        return Err(Error::Input(format!("start has {} values, model has {}", f.len(), w.len())));
    }
    if !normalize(w, &mut f) {
        return Err(Error::Degenerate("start vector has zero norm".into()));
    }
    let mut q = lsi_quotient_of(model, &f).ok_or_else(|| Error::Degenerate("start vector is constant".into()))?;
    let mut values = vec![q];
    let mut converged = false;
    for _ in 0..max_iters {
        let grad = quotient_gradient(model, &f, q);
        let Some(dir) = direction(&f, q, &grad) else {
            converged = true;
            break;
        };
        let mut accepted = None;
        let mut step = 1.0;
        for _ in 0..MAX_HALVINGS {
            let mut trial: Vec<f64> = f.iter().zip(&dir).map(|(f, d)| f + step * d).collect();
            if normalize(w, &mut trial) && spread_ok(&trial) {
                if let Some(qt) = lsi_quotient_of(model, &trial) {
                    if qt > q {
                        accepted = Some((trial, qt));
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        let Some((trial, qt)) = accepted else {
            converged = true;
            break;
        };
        let change = (qt - q) / q.abs();
        f = trial;
        q = qt;
        values.push(q);
        if change <= rel_tol {
            converged = true;
            break;
        }
    }
    Ok(AscentTrace { values, witness: f, converged })
}

/// Runs [`ascend`] from each start and keeps the best trace. Degenerate
/// starts are skipped.
pub fn best_of<M: QuotientModel + ?Sized>(
    model: &M,
    starts: Vec<Vec<f64>>,
    opts: &AscentOptions,
) -> Result<AscentTrace> {
    let mut best: Option<AscentTrace> = None;
    let mut last_err = None;
    for start in starts {
        match ascend(model, start, opts.max_iters, opts.rel_tol) {
            Ok(trace) => {
                if best.as_ref().is_none_or(|b| trace.best() > b.best()) {
                    best = Some(trace);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| {
        Error::Optimization(format!(
            "every restart was degenerate (last error: {})",
            last_err.map(|e| e.to_string()).unwrap_or_else(|| "no restarts".into())
        ))
    })
}

/// A seeded generator for random restarts.
pub fn restart_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform noise in `[-1, 1)`.
pub fn noise<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}
