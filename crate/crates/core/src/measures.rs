//! Exact primitives on finitely supported probability measures.
//!
//! Everything here is evaluated exactly up to floating-point rounding:
//! variance, entropy, KL and χ² divergences, the `K_{p,χ²}` moment of a
//! finite mixture, and residual checks for the variance/entropy
//! decompositions of a mixture `μP = Σ μ_i P_i`.
//!
//! Conventions: natural logarithms, `0·log 0 = 0`, and divergences are
//! `+∞` exactly when absolute continuity fails.

use std::collections::HashSet;

use crate::bounds::DualExponent;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::summation::{compensated_sum, CompensatedSum};

/// Absolute tolerance on the total mass of a [`DiscreteMeasure`].
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Identifier of a state in a finite state space.
pub type StateId = u64;

/// A finitely supported probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    states: Vec<StateId>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(states: Vec<StateId>, weights: Vec<f64>) -> Result<Self> {
        if states.len() != weights.len() {
            return Err(Error::Input(format!(
                "{} states but {} weights",
                states.len(),
                weights.len()
            )));
        }
        if states.is_empty() {
            return Err(Error::Input("measure needs at least one state".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Input(format!("weight {w} is negative or not finite")));
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Input(format!("weights sum to {total}, not 1")));
        }
        let mut seen = HashSet::with_capacity(states.len());
        if let Some(s) = states.iter().find(|s| !seen.insert(**s)) {
            return Err(Error::Input(format!("duplicate state {s}")));
        }
        Ok(Self { states, weights })
    }

    /// Measure on states `0..weights.len()`.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let states = (0..weights.len() as StateId).collect();
        Self::new(states, weights)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_weights(vec![1.0 / n as f64; n])
    }

    /// Point mass at the `index`-th of `n` states.
    pub fn dirac(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::Input(format!("index {index} out of range for {n} states")));
        }
        let mut w = vec![0.0; n];
        w[index] = 1.0;
        Self::from_weights(w)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn expectation(&self, f: &DiscreteFunction) -> Result<f64> {
        self.check_function(f)?;
        Ok(weighted_sum(&self.weights, f.values()))
    }

    fn check_function(&self, f: &DiscreteFunction) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::Input(format!(
                "function has {} values but measure has {} states",
                f.len(),
                self.len()
            )));
        }
        Ok(())
    }

    fn check_same_states(&self, other: &DiscreteMeasure) -> Result<()> {
        if self.states != other.states {
            return Err(Error::Input("measures live on different state sets".into()));
        }
        Ok(())
    }
}

/// Real function on the states of a [`DiscreteMeasure`], in state order.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction {
    values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Input(format!("function value {v} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn map(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| g(v)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceKind {
    Kl,
    Chi2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceValue {
    pub value: ExtendedReal,
    pub kind: DivergenceKind,
}

fn weighted_sum(w: &[f64], f: &[f64]) -> f64 {
    compensated_sum(w.iter().zip(f).map(|(w, f)| w * f))
}

/// `x log x` with `0 log 0 = 0`.
pub fn variance(rho: &DiscreteMeasure, f: &DiscreteFunction) -> Result<f64> {
    rho.check_function(f)?;
    Ok(variance_raw(rho.weights(), f.values()))
}

pub(crate) fn variance_raw(w: &[f64], f: &[f64]) -> f64 {
    let m = weighted_sum(w, f);
    compensated_sum(w.iter().zip(f).map(|(w, f)| w * (f - m) * (f - m)))
}

/// `ent_ρ(g) = E_ρ(g log g) − E_ρ g · log E_ρ g` for `g ≥ 0`.
pub fn entropy(rho: &DiscreteMeasure, g: &DiscreteFunction) -> Result<f64> {
    rho.check_function(g)?;
    if let Some(v) = g.values().iter().find(|v| **v < 0.0) {
        return Err(Error::Input(format!("entropy needs g >= 0, got {v}")));
    }
    Ok(entropy_raw(rho.weights(), g.values()))
}

/// `(1+u) log(1+u) − u` for `u ≥ −1`.
fn bregman_xlogx(u: f64) -> f64 {
    if u <= -1.0 {
        return 1.0;
    }
    if u.abs() > 0.05 {
        return (1.0 + u) * u.ln_1p() - u;
    }
    // Σ_{k≥2} (−u)^k / (k(k−1)); 0.05¹⁴ is below machine precision.
    let mut term = u * u;
    let mut sum = 0.0;
    for k in 2..16 {
        sum += term / (k * (k - 1)) as f64;
        term *= -u;
    }
    sum
}

// Summed as Σ w m φ(g/m − 1) with φ(u) = (1+u) log(1+u) − u ≥ 0, which
// stays accurate when g is nearly constant.
pub(crate) fn entropy_raw(w: &[f64], g: &[f64]) -> f64 {
    let mean = weighted_sum(w, g);
    let mut support = w.iter().zip(g).filter(|(w, _)| **w > 0.0).map(|(_, g)| *g);
    let first = support.next();
    if !(mean > 0.0) || support.all(|g| Some(g) == first) {
        return 0.0;
    }
    let mut acc = CompensatedSum::new();
    for (w, g) in w.iter().zip(g) {
        if *w > 0.0 {
            acc.add(w * bregman_xlogx((g - mean) / mean));
        }
    }
    (mean * acc.value()).max(0.0)
}

/// `D_KL(ρ₁‖ρ₂) = Σ ρ₁ᵢ log(ρ₁ᵢ/ρ₂ᵢ)`.
pub fn kl_divergence(rho1: &DiscreteMeasure, rho2: &DiscreteMeasure) -> Result<DivergenceValue> {
    rho1.check_same_states(rho2)?;
    let mut acc = CompensatedSum::new();
    for (&a, &b) in rho1.weights().iter().zip(rho2.weights()) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(DivergenceValue { value: ExtendedReal::Infinity, kind: DivergenceKind::Kl });
        }
        acc.add(a * (a / b).ln());
    }
    Ok(DivergenceValue {
        value: ExtendedReal::Finite(acc.value().max(0.0)),
        kind: DivergenceKind::Kl,
    })
}

/// `χ²(ρ₁‖ρ₂) = Σ ρ₁ᵢ²/ρ₂ᵢ − 1`.
pub fn chi2_divergence(rho1: &DiscreteMeasure, rho2: &DiscreteMeasure) -> Result<DivergenceValue> {
    rho1.check_same_states(rho2)?;
    Ok(DivergenceValue { value: chi2_raw(rho1.weights(), rho2.weights()), kind: DivergenceKind::Chi2 })
}

pub(crate) fn chi2_raw(a: &[f64], b: &[f64]) -> ExtendedReal {
    // Σ (a−b)²/b keeps precision when a ≈ b.
    let mut acc = CompensatedSum::new();
    for (&a, &b) in a.iter().zip(b) {
        if b == 0.0 {
            if a > 0.0 {
                return ExtendedReal::Infinity;
            }
            continue;
        }
        acc.add((a - b) * (a - b) / b);
    }
    ExtendedReal::from_f64(acc.value().max(0.0))
}

/// `K_{p,χ²} = (Σᵢⱼ μᵢμⱼ (1+χ²ᵢⱼ)^p)^{1/p}`, or `1 + max χ²ᵢⱼ` over the
/// support of `μ⊗μ` when `p = ∞`.
pub fn k_p_chi2_discrete(
    mu: &DiscreteMeasure,
    pairwise_chi2: &[Vec<ExtendedReal>],
    exponent: DualExponent,
) -> Result<ExtendedReal> {
    let n = mu.len();
    if pairwise_chi2.len() != n || pairwise_chi2.iter().any(|row| row.len() != n) {
        return Err(Error::Input(format!("pairwise χ² matrix must be {n}×{n}")));
    }
    let w = mu.weights();
    let mut log_terms = Vec::with_capacity(n * n);
    for (i, row) in pairwise_chi2.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            let mass = w[i] * w[j];
            if mass == 0.0 {
                continue;
            }
            match *c {
                ExtendedReal::Infinity => return Ok(ExtendedReal::Infinity),
                ExtendedReal::Finite(c) if c < 0.0 || c.is_nan() => {
                    return Err(Error::Input(format!("χ² entry ({i},{j}) = {c} is negative")));
                }
                ExtendedReal::Finite(c) => log_terms.push((mass, c.ln_1p())),
            }
        }
    }
    if exponent.is_infinite() {
        let max_log = log_terms.iter().map(|t| t.1).fold(0.0, f64::max);
        return Ok(ExtendedReal::from_f64(max_log.exp()));
    }
    let p = exponent.p();
    // log Σ m exp(p·ℓ), shifted by the max for stability.
    let shift = log_terms.iter().map(|t| p * t.1).fold(f64::NEG_INFINITY, f64::max);
    let s = compensated_sum(log_terms.iter().map(|(m, l)| m * (p * l - shift).exp()));
    Ok(ExtendedReal::from_f64(((s.ln() + shift) / p).exp()))
}

/// Slack `RHS − LHS` of
/// `E_π f log(E_π f / E_ρ f) ≤ ent_π(f) + E_π f · log(1 + χ²(π‖ρ))`.
///
/// Both sides are taken as 0 when `E_π f = 0`.
pub fn check_dv_inequality(
    pi: &DiscreteMeasure,
    rho: &DiscreteMeasure,
    f: &DiscreteFunction,
) -> Result<f64> {
    pi.check_same_states(rho)?;
    let ent = entropy(pi, f)?;
    let e_pi = pi.expectation(f)?;
    if e_pi == 0.0 {
        return Ok(0.0);
    }
    let chi2 = chi2_divergence(pi, rho)?
        .value
        .finite()
        .ok_or_else(|| Error::Input("π is not absolutely continuous w.r.t. ρ".into()))?;
    let e_rho = rho.expectation(f)?;
    let lhs = e_pi * (e_pi / e_rho).ln();
    let rhs = ent + e_pi * chi2.ln_1p();
    Ok(rhs - lhs)
}

/// The mixture `μP(y) = Σᵢ μᵢ Pᵢ(y)` of kernel rows on a common space.
pub fn mixture(mu: &DiscreteMeasure, kernel_rows: &[DiscreteMeasure]) -> Result<DiscreteMeasure> {
    check_kernel(mu, kernel_rows)?;
    let target = &kernel_rows[0];
    let weights = (0..target.len())
        .map(|y| compensated_sum(mu.weights().iter().zip(kernel_rows).map(|(m, row)| m * row.weights()[y])))
        .collect();
    DiscreteMeasure::new(target.states().to_vec(), weights)
}

fn check_kernel(mu: &DiscreteMeasure, kernel_rows: &[DiscreteMeasure]) -> Result<()> {
    if kernel_rows.len() != mu.len() {
        return Err(Error::Input(format!(
            "{} kernel rows for a mixing measure with {} atoms",
            kernel_rows.len(),
            mu.len()
        )));
    }
    for row in &kernel_rows[1..] {
        row.check_same_states(&kernel_rows[0])?;
    }
    Ok(())
}

/// `|var_{μP} f − (Σ μᵢ var_{Pᵢ} f + var_μ(i ↦ E_{Pᵢ} f))|`.
pub fn check_variance_decomposition(
    mu: &DiscreteMeasure,
    kernel_rows: &[DiscreteMeasure],
    f: &DiscreteFunction,
) -> Result<f64> {
    let mix = mixture(mu, kernel_rows)?;
    let total = variance(&mix, f)?;
    let mut within = CompensatedSum::new();
    let mut means = Vec::with_capacity(mu.len());
    for (m, row) in mu.weights().iter().zip(kernel_rows) {
        within.add(m * variance(row, f)?);
        means.push(row.expectation(f)?);
    }
    let between = variance_raw(mu.weights(), &means);
    Ok((total - (within.value() + between)).abs())
}

/// `|ent_{μP} f² − (Σ μᵢ ent_{Pᵢ} f² + ent_μ(i ↦ E_{Pᵢ} f²))|`.
pub fn check_entropy_decomposition(
    mu: &DiscreteMeasure,
    kernel_rows: &[DiscreteMeasure],
    f: &DiscreteFunction,
) -> Result<f64> {
    let f2 = f.map(|v| v * v)?;
    let mix = mixture(mu, kernel_rows)?;
    let total = entropy(&mix, &f2)?;
    let mut within = CompensatedSum::new();
    let mut means = Vec::with_capacity(mu.len());
    for (m, row) in mu.weights().iter().zip(kernel_rows) {
        within.add(m * entropy(row, &f2)?);
        means.push(row.expectation(&f2)?);
    }
    let between = entropy_raw(mu.weights(), &means);
    Ok((total - (within.value() + between)).abs())
}

/// Slack of `χ²(μP ‖ P_x) ≤ Σ_{x'} μ(x') χ²(P_{x'} ‖ P_x)` for the row `x`.
pub fn check_chi2_convexity(
    mu: &DiscreteMeasure,
    kernel_rows: &[DiscreteMeasure],
    x: usize,
) -> Result<ExtendedReal> {
    let mix = mixture(mu, kernel_rows)?;
    let anchor = kernel_rows
        .get(x)
        .ok_or_else(|| Error::Input(format!("row index {x} out of range")))?;
    let lhs = chi2_divergence(&mix, anchor)?.value;
    let mut rhs = ExtendedReal::ZERO;
    for (m, row) in mu.weights().iter().zip(kernel_rows) {
        if *m > 0.0 {
            rhs = rhs + chi2_divergence(row, anchor)?.value * *m;
        }
    }
    Ok(match (lhs, rhs) {
        (_, ExtendedReal::Infinity) => ExtendedReal::Infinity,
        (ExtendedReal::Infinity, _) => ExtendedReal::Finite(f64::NEG_INFINITY),
        (ExtendedReal::Finite(l), ExtendedReal::Finite(r)) => ExtendedReal::Finite(r - l),
    })
}
