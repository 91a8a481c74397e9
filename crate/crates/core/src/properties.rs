//! Seeded randomized checks of the finite-space identities and inequalities.
//!
//! Each suite draws its instances from one ChaCha stream, so a `(seed,
//! instances)` pair always replays the same cases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::extended::ExtendedReal;
use crate::measures::{self, DiscreteMeasure};
use crate::sampling::{random_function, random_measure, random_nonnegative_function};

pub const DEFAULT_INSTANCES: usize = 10_000;
pub const SLACK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    /// `E_π f log(E_π f / E_ρ f) ≤ ent_π(f) + E_π f log(1 + χ²(π‖ρ))`.
    ChangeOfMeasure,
    VarianceDecomposition,
    EntropyDecomposition,
    Chi2Convexity,
    /// `0 ≤ KL ≤ log(1 + χ²)`.
    DivergenceOrdering,
}

impl Check {
    pub const ALL: [Check; 5] = [
        Check::ChangeOfMeasure,
        Check::VarianceDecomposition,
        Check::EntropyDecomposition,
        Check::Chi2Convexity,
        Check::DivergenceOrdering,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Check::ChangeOfMeasure => "change_of_measure_slack",
            Check::VarianceDecomposition => "variance_decomposition_residual",
            Check::EntropyDecomposition => "entropy_decomposition_residual",
            Check::Chi2Convexity => "chi2_convexity_slack",
            Check::DivergenceOrdering => "divergence_ordering_slack",
        }
    }

    /// Residual checks pass when the worst value is small; slack checks when
    /// it is not too negative.
    fn is_residual(self) -> bool {
        matches!(self, Check::VarianceDecomposition | Check::EntropyDecomposition)
    }

    fn salt(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub check: Check,
    pub instances: usize,
    /// Largest residual or smallest slack seen.
    pub worst: f64,
    pub pass: bool,
}

fn random_size<R: Rng>(rng: &mut R) -> usize {
    rng.random_range(2..=8)
}

/// Mixing weights over `m ∈ [1, 4]` components and one random row each.
fn random_mixture<R: Rng>(rng: &mut R, n: usize) -> Result<(DiscreteMeasure, Vec<DiscreteMeasure>)> {
    let m = rng.random_range(1..=4);
    let mu = random_measure(rng, m)?;
    let rows = (0..m).map(|_| random_measure(rng, n)).collect::<Result<_>>()?;
    Ok((mu, rows))
}

fn sample<R: Rng>(check: Check, rng: &mut R) -> Result<f64> {
    let n = random_size(rng);
    match check {
        Check::ChangeOfMeasure => {
            let pi = random_measure(rng, n)?;
            let rho = random_measure(rng, n)?;
            measures::check_dv_inequality(&pi, &rho, &random_nonnegative_function(rng, n)?)
        }
        Check::VarianceDecomposition => {
            let (mu, rows) = random_mixture(rng, n)?;
            measures::check_variance_decomposition(&mu, &rows, &random_function(rng, n)?)
        }
        Check::EntropyDecomposition => {
            let (mu, rows) = random_mixture(rng, n)?;
            measures::check_entropy_decomposition(&mu, &rows, &random_function(rng, n)?)
        }
        Check::Chi2Convexity => {
            let (mu, rows) = random_mixture(rng, n)?;
            let x = rng.random_range(0..rows.len());
            Ok(match measures::check_chi2_convexity(&mu, &rows, x)? {
                ExtendedReal::Finite(s) => s,
                ExtendedReal::Infinity => f64::INFINITY,
            })
        }
        Check::DivergenceOrdering => {
            let a = random_measure(rng, n)?;
            let b = random_measure(rng, n)?;
            let kl = measures::kl_divergence(&a, &b)?.value.to_f64();
            let chi2 = measures::chi2_divergence(&a, &b)?.value.to_f64();
            Ok(kl.min(chi2.ln_1p() - kl))
        }
    }
}

pub fn run_suite(check: Check, seed: u64, instances: usize) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ check.salt().wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let residual = check.is_residual();
    let mut worst = if residual { 0.0 } else { f64::INFINITY };
    for _ in 0..instances {
        let v = sample(check, &mut rng)?;
        worst = if residual { worst.max(v) } else { worst.min(v) };
    }
    let pass = if residual { worst <= SLACK_TOLERANCE } else { worst >= -SLACK_TOLERANCE };
    Ok(SuiteOutcome { check, instances, worst, pass })
}

pub fn run_all(seed: u64, instances: usize) -> Result<Vec<SuiteOutcome>> {
    Check::ALL.iter().map(|c| run_suite(*c, seed, instances)).collect()
}
