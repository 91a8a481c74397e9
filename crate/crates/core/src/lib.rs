//! Log-Sobolev and Poincaré constants of mixtures.
//!
//! The crate pairs closed-form upper and lower bounds ([`bounds`]) with
//! independent numerical estimates of the same constants:
//!
//! - [`measures`]: exact divergences and entropy on finite spaces;
//! - [`spectral1d`]: Poincaré constants of 1-d Gaussian convolutions from a
//!   finite-volume generalized eigenproblem;
//! - [`variational`]: certified log-Sobolev lower bounds from test functions;
//! - [`hypercube`]: exact ground truth for Bernoulli-product mixtures on `{0,1}ⁿ`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ascent;
pub mod bounds;
pub mod error;
pub mod extended;
pub mod hypercube;
pub mod measures;
pub mod properties;
pub mod sampling;
pub mod spectral1d;
pub mod summation;
pub mod variational;

pub use bounds::{BoundReport, Direction, DualExponent, FormulaId, MixtureBoundInputs, TargetConstant};
pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use hypercube::{ExactConstants, HypercubeInstance};
pub use measures::{DiscreteFunction, DiscreteMeasure, DivergenceKind, DivergenceValue};
pub use spectral1d::{AtomicMixingMeasure1D, EigenEstimate, GridDensity1D};
pub use variational::{LsiLowerBoundCertificate, TestFunction1D};
