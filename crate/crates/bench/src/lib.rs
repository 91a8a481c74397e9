//! Fixtures shared by the solver benchmarks in `benches/`.

use lsilab::hypercube::{self, HypercubeInstance};
use lsilab::spectral1d::build_grid_density;
use lsilab::{AtomicMixingMeasure1D, DiscreteMeasure, GridDensity1D};

/// Density of `(½δ_{−1} + ½δ_1) * γ_{0,t}` on `n` nodes.
pub fn pair_grid(t: f64, n: usize) -> GridDensity1D {
    let mu = AtomicMixingMeasure1D::symmetric_pair(1.0).expect("valid pair");
    build_grid_density(&mu, t, n, 8.0).expect("grid fits the window")
}

/// Mixture law on `{0,1}ⁿ` of the two-point instance with diameter `n/2`.
pub fn cube_mixture(n: u32, p: f64) -> (HypercubeInstance, DiscreteMeasure) {
    let inst = hypercube::two_point_instance(n, (n / 2).max(1), p).expect("valid instance");
    let rho = hypercube::mixture_distribution(&inst).expect("normalizable mixture");
    (inst, rho)
}
