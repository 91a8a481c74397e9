use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or inconsistent input (shape mismatch, negative weight, ...).
    #[error("invalid input: {0}")]
    Input(String),
    /// A parameter lies outside the region where a formula is valid.
    #[error("outside domain: {0}")]
    Domain(String),
    /// The grid window lost more probability mass than allowed.
    #[error("truncation error: mass deficit {deficit:e} exceeds tolerance {tol:e}")]
    Truncation { deficit: f64, tol: f64 },
    /// Density underflowed to zero on the grid.
    #[error("density underflow at node {node} (y = {y}); narrow the window or increase t")]
    Underflow { node: usize, y: f64 },
    /// An iterative solver did not reach its tolerance.
    #[error("solver did not converge after {iterations} iterations (last relative change {last_change:e})")]
    Solver { iterations: usize, last_change: f64 },
    /// A quotient with zero denominator, or a constant test function.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// Every restart of an optimization was degenerate.
    #[error("optimization failed: {0}")]
    Optimization(String),
    /// Problem size beyond the supported cap.
    #[error("size limit exceeded: {0}")]
    Size(String),
}

pub type Result<T> = std::result::Result<T, Error>;
