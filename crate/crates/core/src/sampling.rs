//! Seeded random instances for property checks.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::Result;
use crate::measures::{DiscreteFunction, DiscreteMeasure};

/// Smallest weight kept by [`random_simplex`] before renormalization.
pub const WEIGHT_FLOOR: f64 = 1e-6;

/// Symmetric Dirichlet(1) draw, floored at [`WEIGHT_FLOOR`] and renormalized.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    let floored: Vec<f64> = raw.iter().map(|x| (x / total).max(WEIGHT_FLOOR)).collect();
    let total: f64 = floored.iter().sum();
    floored.into_iter().map(|x| x / total).collect()
}

pub fn random_measure<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<DiscreteMeasure> {
    DiscreteMeasure::from_weights(random_simplex(rng, n))
}

/// Nonnegative function with occasional exact zeros.
pub fn random_nonnegative_function<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<DiscreteFunction> {
    let values = (0..n)
        .map(|_| if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..5.0) })
        .collect();
    DiscreteFunction::new(values)
}

pub fn random_function<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<DiscreteFunction> {
    DiscreteFunction::new((0..n).map(|_| rng.random_range(-3.0..3.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn simplex_is_a_floored_probability_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..10 {
            let w = random_simplex(&mut rng, n);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(w.iter().all(|x| *x >= WEIGHT_FLOOR * 0.99));
        }
    }
}
