//! Closed-form constants for mixtures of measures.
//!
//! Every bound is returned as a [`BoundReport`] tagged with a stable
//! [`FormulaId`] so that downstream reports can trace each number back to
//! the expression that produced it. Values whose exponential factor would
//! overflow are reported as `+∞`, with the natural log of the bound kept in
//! [`BoundReport::log_value`].

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;

/// Exponents `x` in `e^x` above this are reported as `+∞`.
pub const EXP_OVERFLOW_THRESHOLD: f64 = 700.0;

/// Hölder exponent `p ∈ (1, ∞]` with its dual `p* = p/(p−1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualExponent {
    p: f64,
    p_star: f64,
}

impl DualExponent {
    /// Accepts `f64::INFINITY` for the `p = ∞` case.
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            return Ok(Self::infinity());
        }
        Self::finite(p)
    }

    pub fn finite(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::Input(format!("exponent p must lie in (1, ∞], got {p}")));
        }
        Ok(Self { p, p_star: p / (p - 1.0) })
    }

    pub fn infinity() -> Self {
        Self { p: f64::INFINITY, p_star: 1.0 }
    }

    pub fn p(self) -> f64 {
        self.p
    }

    pub fn p_star(self) -> f64 {
        self.p_star
    }

    pub fn is_infinite(self) -> bool {
        self.p.is_infinite()
    }
}

impl fmt::Display for DualExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.p)
        }
    }
}

/// Stable identifiers of the bound catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FormulaId {
    Thm31Pi,
    Thm31Lsi,
    Cor41Gauss,
    Cor41T2,
    Rem3LargeT,
    Rem3Lower,
    Thm42Pi,
    Thm42Lsi,
    Cor43Diffusion,
    Cor44TwoMixture,
    Cor45Hypercube,
    Cor45Bernoulli,
    PropATighten,
}

impl FormulaId {
    pub const ALL: [FormulaId; 13] = [
        FormulaId::Thm31Pi,
        FormulaId::Thm31Lsi,
        FormulaId::Cor41Gauss,
        FormulaId::Cor41T2,
        FormulaId::Rem3LargeT,
        FormulaId::Rem3Lower,
        FormulaId::Thm42Pi,
        FormulaId::Thm42Lsi,
        FormulaId::Cor43Diffusion,
        FormulaId::Cor44TwoMixture,
        FormulaId::Cor45Hypercube,
        FormulaId::Cor45Bernoulli,
        FormulaId::PropATighten,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FormulaId::Thm31Pi => "thm31_pi",
            FormulaId::Thm31Lsi => "thm31_lsi",
            FormulaId::Cor41Gauss => "cor41_gauss",
            FormulaId::Cor41T2 => "cor41_t2",
            FormulaId::Rem3LargeT => "rem3_large_t",
            FormulaId::Rem3Lower => "rem3_lower",
            FormulaId::Thm42Pi => "thm42_pi",
            FormulaId::Thm42Lsi => "thm42_lsi",
            FormulaId::Cor43Diffusion => "cor43_diffusion",
            FormulaId::Cor44TwoMixture => "cor44_two_mixture",
            FormulaId::Cor45Hypercube => "cor45_hypercube",
            FormulaId::Cor45Bernoulli => "cor45_bernoulli",
            FormulaId::PropATighten => "propA_tighten",
        }
    }

    pub fn parse(s: &str) -> Option<FormulaId> {
        FormulaId::ALL.into_iter().find(|f| f.as_str() == s)
    }

    /// Human-readable expression, for `list-formulas`.
    pub fn expression(self) -> &'static str {
        match self {
            FormulaId::Thm31Pi => "C_P(μP) ≤ K_P (p* + K_{p,χ²}^{p*})",
            FormulaId::Thm31Lsi => "C_LS(μP) ≤ 3 K_LS (p* + K_{p,χ²}^{p*}) (1 + log K_{p,χ²}^{p*})",
            FormulaId::Cor41Gauss => "C_LS(μ*γ_t) ≤ 6 (4R² + t) e^{4R²/t}",
            FormulaId::Cor41T2 => "C_T2(μ*γ_t) ≤ 6 (4R² + t) e^{4R²/t}",
            FormulaId::Rem3LargeT => "C_LS(μ*γ_t) ≤ t + 130 R²  (t ≥ 4R²)",
            FormulaId::Rem3Lower => "C_P(½δ_{-R} + ½δ_R * γ_t) ≥ ¼ R² e^{R²/8t}",
            FormulaId::Thm42Pi => "C_P(μ*γ_t) ≤ t {t/(t−σ²) + C_SG^{σ²/(t−σ²)}}",
            FormulaId::Thm42Lsi => "C_LS(μ*γ_t) ≤ 3t {t/(t−σ²) + C_SG^{σ²/(t−σ²)}} {1 + σ²/(t−σ²) log C_SG}",
            FormulaId::Cor43Diffusion => "C_LS(μP^t) ≤ 6 C_loc(κ,t) K_∞ (1 + log K_∞)",
            FormulaId::Cor44TwoMixture => "C_LS ≤ 6 max{C_LS(P0), C_LS(P1)} K_χ² (1 + log(1 + K_χ²))",
            FormulaId::Cor45Hypercube => "C_LS(μP) ≤ 6k K_LS(π) (1 + K_χ²(π))^k (1 + log(1 + K_χ²(π)))",
            FormulaId::Cor45Bernoulli => "C_LS(μP) ≤ 6k / (p^{k−1} (1−2p)) log²(1/p)",
            FormulaId::PropATighten => "C_LS ≤ C + C_P (D/2 + 1)",
        }
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Upper,
    Lower,
    /// A direct estimate of the constant, acting as both bounds.
    Estimate,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Upper => "upper",
            Direction::Lower => "lower",
            Direction::Estimate => "estimate",
        }
    }
}

/// Which optimal constant a number refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TargetConstant {
    Poincare,
    LogSobolev,
    Transport,
}

impl TargetConstant {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetConstant::Poincare => "C_P",
            TargetConstant::LogSobolev => "C_LS",
            TargetConstant::Transport => "C_T2",
        }
    }

    /// `a ≤ b` holds for the optimal constants of every measure
    /// (`C_P ≤ C_LS`, `C_T2 ≤ C_LS`).
    pub fn always_below(a: TargetConstant, b: TargetConstant) -> bool {
        use TargetConstant::*;
        a == b || matches!((a, b), (Poincare, LogSobolev) | (Transport, LogSobolev))
    }
}

/// A bound value with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub formula_id: FormulaId,
    pub inputs: BTreeMap<&'static str, f64>,
    pub bound_value: ExtendedReal,
    /// Natural log of the bound, finite even when `bound_value` overflowed.
    pub log_value: f64,
    pub direction: Direction,
    pub target: TargetConstant,
    /// Set when the formula evaluated in a degenerate regime.
    pub warning: Option<String>,
}

impl BoundReport {
    fn new(
        formula_id: FormulaId,
        inputs: &[(&'static str, f64)],
        value: f64,
        log_value: f64,
        force_infinite: bool,
        direction: Direction,
        target: TargetConstant,
    ) -> Self {
        let bound_value = if force_infinite || !value.is_finite() {
            ExtendedReal::Infinity
        } else {
            ExtendedReal::Finite(value)
        };
        Self {
            formula_id,
            inputs: inputs.iter().copied().collect(),
            bound_value,
            log_value,
            direction,
            target,
            warning: None,
        }
    }

    pub fn value(&self) -> f64 {
        self.bound_value.to_f64()
    }
}

/// `log(eᵃ + eᵇ)`.
fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

fn require(cond: bool, err: impl FnOnce() -> Error) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(err())
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    require(x.is_finite() && x > 0.0, || Error::Input(format!("{name} must be positive and finite, got {x}")))
}

fn nonnegative(name: &str, x: f64) -> Result<()> {
    require(x.is_finite() && x >= 0.0, || Error::Input(format!("{name} must be nonnegative and finite, got {x}")))
}

/// Inputs shared by both parts of the mixture theorem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureBoundInputs {
    pub k_ls: f64,
    pub k_p: f64,
    pub exponent: DualExponent,
    /// Uniform Poincaré constant; falls back to `k_ls` when absent.
    pub k_poincare: Option<f64>,
}

impl MixtureBoundInputs {
    pub fn new(k_ls: f64, k_p: f64, exponent: DualExponent) -> Self {
        Self { k_ls, k_p, exponent, k_poincare: None }
    }

    pub fn with_poincare(mut self, k_poincare: f64) -> Self {
        self.k_poincare = Some(k_poincare);
        self
    }

    fn validate(&self) -> Result<()> {
        positive("K_LS", self.k_ls)?;
        require(self.k_p.is_finite() && self.k_p >= 1.0, || {
            Error::Input(format!("K_{{p,χ²}} must be finite and ≥ 1, got {}", self.k_p))
        })?;
        if let Some(kp) = self.k_poincare {
            positive("K_P", kp)?;
            require(kp <= self.k_ls, || Error::Input(format!("K_P = {kp} exceeds K_LS = {}", self.k_ls)))?;
        }
        Ok(())
    }

    fn inputs(&self, k_first: (&'static str, f64)) -> Vec<(&'static str, f64)> {
        vec![k_first, ("k_p", self.k_p), ("p", self.exponent.p()), ("p_star", self.exponent.p_star())]
    }
}

/// `K_P (p* + K_{p,χ²}^{p*})`.
pub fn poincare_mixture_bound(inp: &MixtureBoundInputs) -> Result<BoundReport> {
    inp.validate()?;
    let kp = inp.k_poincare.unwrap_or(inp.k_ls);
    let ps = inp.exponent.p_star();
    let value = kp * (ps + inp.k_p.powf(ps));
    let log_value = kp.ln() + log_add_exp(ps.ln(), ps * inp.k_p.ln());
    Ok(BoundReport::new(
        FormulaId::Thm31Pi,
        &inp.inputs(("k_poincare", kp)),
        value,
        log_value,
        false,
        Direction::Upper,
        TargetConstant::Poincare,
    ))
}

/// `3 K_LS (p* + K_{p,χ²}^{p*}) (1 + log K_{p,χ²}^{p*})`.
pub fn lsi_mixture_bound(inp: &MixtureBoundInputs) -> Result<BoundReport> {
    inp.validate()?;
    let ps = inp.exponent.p_star();
    let log_k = ps * inp.k_p.ln();
    let value = 3.0 * inp.k_ls * (ps + inp.k_p.powf(ps)) * (1.0 + log_k);
    let log_value = 3f64.ln() + inp.k_ls.ln() + log_add_exp(ps.ln(), log_k) + log_k.ln_1p();
    Ok(BoundReport::new(
        FormulaId::Thm31Lsi,
        &inp.inputs(("k_ls", inp.k_ls)),
        value,
        log_value,
        false,
        Direction::Upper,
        TargetConstant::LogSobolev,
    ))
}

fn gaussian_convolution(id: FormulaId, target: TargetConstant, r: f64, t: f64) -> Result<BoundReport> {
    nonnegative("R", r)?;
    positive("t", t)?;
    let x = 4.0 * r * r / t;
    let value = 6.0 * (4.0 * r * r + t) * x.exp();
    let log_value = 6f64.ln() + (4.0 * r * r + t).ln() + x;
    Ok(BoundReport::new(
        id,
        &[("R", r), ("t", t)],
        value,
        log_value,
        x > EXP_OVERFLOW_THRESHOLD,
        Direction::Upper,
        target,
    ))
}

/// `6 (4R² + t) e^{4R²/t}` for `C_LS(μ*γ_{0,t})`, `supp μ ⊂ B(0,R)`.
pub fn gaussian_convolution_lsi_bound(r: f64, t: f64) -> Result<BoundReport> {
    gaussian_convolution(FormulaId::Cor41Gauss, TargetConstant::LogSobolev, r, t)
}

/// The same expression, read as a `T₂` transport-entropy constant.
pub fn gaussian_convolution_t2_bound(r: f64, t: f64) -> Result<BoundReport> {
    gaussian_convolution(FormulaId::Cor41T2, TargetConstant::Transport, r, t)
}

/// `t + 130 R²`, valid for `t ≥ 4R²`.
pub fn gaussian_convolution_large_t_bound(r: f64, t: f64) -> Result<BoundReport> {
    nonnegative("R", r)?;
    positive("t", t)?;
    require(t >= 4.0 * r * r, || Error::Domain(format!("t = {t} is below 4R² = {}", 4.0 * r * r)))?;
    let value = t + 130.0 * r * r;
    Ok(BoundReport::new(
        FormulaId::Rem3LargeT,
        &[("R", r), ("t", t)],
        value,
        value.ln(),
        false,
        Direction::Upper,
        TargetConstant::LogSobolev,
    ))
}

/// `¼ R² e^{R²/(8t)}`, a lower bound on `C_P((½δ_{−R} + ½δ_R) * γ_{0,t})`.
pub fn remark3_poincare_lower_bound(r: f64, t: f64) -> Result<BoundReport> {
    positive("R", r)?;
    positive("t", t)?;
    let x = r * r / (8.0 * t);
    let value = 0.25 * r * r * x.exp();
    let log_value = 2.0 * r.ln() - 4f64.ln() + x;
    Ok(BoundReport::new(
        FormulaId::Rem3Lower,
        &[("R", r), ("t", t)],
        value,
        log_value,
        x > EXP_OVERFLOW_THRESHOLD,
        Direction::Lower,
        TargetConstant::Poincare,
    ))
}

/// Poincaré and log-Sobolev bounds for Gaussian smoothing of a measure with
/// sub-Gaussian tails `∬ exp(|x−x'|²/σ²) dμ dμ ≤ C_SG`, for `t > σ²`.
pub fn subgaussian_bounds(sigma2: f64, c_sg: f64, t: f64) -> Result<(BoundReport, BoundReport)> {
    positive("σ²", sigma2)?;
    positive("t", t)?;
    require(c_sg.is_finite() && c_sg >= 1.0, || Error::Input(format!("C_SG must be ≥ 1, got {c_sg}")))?;
    require(t > sigma2, || Error::Domain(format!("need t > σ², got t = {t}, σ² = {sigma2}")))?;
    let gap = t - sigma2;
    let a = sigma2 / gap;
    let brace = t / gap + c_sg.powf(a);
    let log_brace = log_add_exp((t / gap).ln(), a * c_sg.ln());
    let log_factor = a * c_sg.ln();
    let inputs = [("sigma2", sigma2), ("c_sg", c_sg), ("t", t)];
    let pi = BoundReport::new(
        FormulaId::Thm42Pi,
        &inputs,
        t * brace,
        t.ln() + log_brace,
        false,
        Direction::Upper,
        TargetConstant::Poincare,
    );
    let lsi = BoundReport::new(
        FormulaId::Thm42Lsi,
        &inputs,
        3.0 * t * brace * (1.0 + log_factor),
        3f64.ln() + t.ln() + log_brace + log_factor.ln_1p(),
        false,
        Direction::Upper,
        TargetConstant::LogSobolev,
    );
    Ok((pi, lsi))
}

/// Local log-Sobolev constant of a `CD(κ, ∞)` semigroup at time `t`:
/// `(1 − e^{−2κt})/κ`, or `2t` at `κ = 0`.
pub fn c_loc(kappa: f64, t: f64) -> f64 {
    if kappa == 0.0 {
        2.0 * t
    } else {
        -(-2.0 * kappa * t).exp_m1() / kappa
    }
}

/// `6 C_loc(κ, t) K_∞ (1 + log K_∞)`.
pub fn diffusion_lsi_bound(kappa: f64, t: f64, k_inf: f64) -> Result<BoundReport> {
    require(kappa.is_finite(), || Error::Input(format!("κ must be finite, got {kappa}")))?;
    nonnegative("t", t)?;
    require(k_inf.is_finite() && k_inf >= 1.0, || Error::Input(format!("K_∞ must be ≥ 1, got {k_inf}")))?;
    let cl = c_loc(kappa, t);
    let value = 6.0 * cl * k_inf * (1.0 + k_inf.ln());
    let log_value = 6f64.ln() + cl.ln() + k_inf.ln() + k_inf.ln().ln_1p();
    Ok(BoundReport::new(
        FormulaId::Cor43Diffusion,
        &[("kappa", kappa), ("t", t), ("k_inf", k_inf)],
        value,
        log_value,
        false,
        Direction::Upper,
        TargetConstant::LogSobolev,
    ))
}

/// `6 max{c0, c1} K (1 + log(1 + K))` for a two-component mixture, with
/// `K = max` of the two χ² divergences. Independent of the mixing weight.
pub fn two_mixture_lsi_bound(c0: f64, c1: f64, k_chi2: f64) -> Result<BoundReport> {
    positive("C_LS(P0)", c0)?;
    positive("C_LS(P1)", c1)?;
    nonnegative("K_χ²", k_chi2)?;
    let c = c0.max(c1);
    let value = 6.0 * c * k_chi2 * (1.0 + k_chi2.ln_1p());
    let log_value = 6f64.ln() + c.ln() + k_chi2.ln() + k_chi2.ln_1p().ln_1p();
    let mut report = BoundReport::new(
        FormulaId::Cor44TwoMixture,
        &[("c0", c0), ("c1", c1), ("k_chi2", k_chi2)],
        value,
        log_value,
        false,
        Direction::Upper,
        TargetConstant::LogSobolev,
    );
    if k_chi2 < 1.0 {
        report.warning = Some(format!(
            "K_χ² = {k_chi2} < 1: the printed expression vanishes as K_χ² → 0 and may be vacuous"
        ));
    }
    Ok(report)
}

/// `6k K_LS(π) (1 + K_χ²(π))^k (1 + log(1 + K_χ²(π)))` for a mixture of
/// product measures whose mixing measure has Hamming diameter ≤ k.
pub fn hypercube_lsi_bound(k_ls_pi: f64, k_chi2_pi: f64, k: u32) -> Result<BoundReport> {
    positive("K_LS(π)", k_ls_pi)?;
    nonnegative("K_χ²(π)", k_chi2_pi)?;
    require(k >= 1, || Error::Input("diameter k must be ≥ 1".into()))?;
    let kf = f64::from(k);
    let l = k_chi2_pi.ln_1p();
    let value = 6.0 * kf * k_ls_pi * (1.0 + k_chi2_pi).powi(k as i32) * (1.0 + l);
    let log_value = (6.0 * kf * k_ls_pi).ln() + kf * l + l.ln_1p();
    Ok(BoundReport::new(
        FormulaId::Cor45Hypercube,
        &[("k_ls_pi", k_ls_pi), ("k_chi2_pi", k_chi2_pi), ("k", kf)],
        value,
        log_value,
        false,
        Direction::Upper,
        TargetConstant::LogSobolev,
    ))
}

fn check_bernoulli_p(p: f64) -> Result<()> {
    require(p > 0.0 && p < 0.5, || Error::Domain(format!("Bernoulli parameter must lie in (0, ½), got {p}")))
}

/// `(K_LS(π), K_χ²(π))` for `π₀ = Bernoulli(p)`, `π₁ = Bernoulli(1−p)` with
/// the discrete-gradient Γ.
pub fn bernoulli_pi_constants(p: f64) -> Result<(f64, f64)> {
    check_bernoulli_p(p)?;
    let q = 1.0 - p;
    let k_ls = p * q / (2.0 * (1.0 - 2.0 * p)) * (q / p).ln();
    let k_chi2 = q * q / p + p * p / q - 1.0;
    Ok((k_ls, k_chi2))
}

/// `6k / (p^{k−1} (1−2p)) · log²(1/p)`.
pub fn bernoulli_hypercube_bound(p: f64, k: u32) -> Result<BoundReport> {
    check_bernoulli_p(p)?;
    require(k >= 1, || Error::Input("diameter k must be ≥ 1".into()))?;
    let kf = f64::from(k);
    let l = (1.0 / p).ln();
    let value = 6.0 * kf / (p.powi(k as i32 - 1) * (1.0 - 2.0 * p)) * l * l;
    let log_value = (6.0 * kf).ln() - (kf - 1.0) * p.ln() - (1.0 - 2.0 * p).ln() + 2.0 * l.ln();
    Ok(BoundReport::new(
        FormulaId::Cor45Bernoulli,
        &[("p", p), ("k", kf)],
        value,
        log_value,
        false,
        Direction::Upper,
        TargetConstant::LogSobolev,
    ))
}

/// Full LSI constant `C + C_P (D/2 + 1)` from a defective LSI
/// `ent(f²) ≤ 2C EΓ(f) + D E f²` and a Poincaré constant `C_P`.
pub fn tighten_defective_lsi(c: f64, d: f64, c_p: f64) -> f64 {
    c + c_p * (d / 2.0 + 1.0)
}

/// [`tighten_defective_lsi`] wrapped as a report.
pub fn tighten_defective_lsi_report(c: f64, d: f64, c_p: f64) -> Result<BoundReport> {
    nonnegative("C", c)?;
    nonnegative("D", d)?;
    nonnegative("C_P", c_p)?;
    let value = tighten_defective_lsi(c, d, c_p);
    Ok(BoundReport::new(
        FormulaId::PropATighten,
        &[("c", c), ("d", d), ("c_p", c_p)],
        value,
        value.ln(),
        false,
        Direction::Upper,
        TargetConstant::LogSobolev,
    ))
}

/// An LSI with constant `C` gives a Poincaré inequality with the same constant.
pub fn c_p_from_lsi(c_ls: f64) -> f64 {
    c_ls
}

/// `χ²(γ_{x,t} ‖ γ_{x',t}) = e^{|x−x'|²/t} − 1`.
pub fn gaussian_chi2(x_dist2: f64, t: f64) -> Result<f64> {
    nonnegative("|x−x'|²", x_dist2)?;
    positive("t", t)?;
    Ok((x_dist2 / t).exp_m1())
}

/// `e^{4R²/t}`, the bound on `K_{∞,χ²}` for Gaussian components centred in `B(0,R)`.
pub fn gaussian_k_inf_bound(r: f64, t: f64) -> Result<f64> {
    nonnegative("R", r)?;
    positive("t", t)?;
    Ok((4.0 * r * r / t).exp())
}

/// `Π(1 + cᵢ) − 1`: χ² between product measures from per-coordinate values.
pub fn chi2_tensorize(component_chi2s: &[ExtendedReal]) -> ExtendedReal {
    let mut log_prod = 0.0;
    for c in component_chi2s {
        match c {
            ExtendedReal::Infinity => return ExtendedReal::Infinity,
            ExtendedReal::Finite(c) => log_prod += c.ln_1p(),
        }
    }
    ExtendedReal::from_f64(log_prod.exp_m1())
}
