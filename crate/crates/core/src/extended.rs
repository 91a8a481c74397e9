use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

/// A nonnegative quantity that may be `+∞`.
///
/// Divergences and bound formulas produce `+∞` as a defined output
/// (absolute-continuity failure, exponential overflow) rather than an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinity,
}

impl ExtendedReal {
    pub const ZERO: ExtendedReal = ExtendedReal::Finite(0.0);

    /// Maps `f64::INFINITY` to [`ExtendedReal::Infinity`].
    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtendedReal::Infinity
        } else {
            ExtendedReal::Finite(x)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(x) => x,
            ExtendedReal::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedReal::Infinity)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            ExtendedReal::Infinity => None,
        }
    }

    /// `self^p` for `p > 0`; `∞^p = ∞`.
    pub fn powf(self, p: f64) -> Self {
        match self {
            ExtendedReal::Finite(x) => ExtendedReal::from_f64(x.powf(p)),
            ExtendedReal::Infinity => ExtendedReal::Infinity,
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(x: f64) -> Self {
        ExtendedReal::from_f64(x)
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::from_f64(a + b),
            _ => ExtendedReal::Infinity,
        }
    }
}

/// Multiplication by a nonnegative finite scalar; `0 · ∞` is taken as `0`.
impl Mul<f64> for ExtendedReal {
    type Output = ExtendedReal;
    fn mul(self, rhs: f64) -> Self {
        match self {
            ExtendedReal::Finite(a) => ExtendedReal::from_f64(a * rhs),
            ExtendedReal::Infinity if rhs == 0.0 => ExtendedReal::ZERO,
            ExtendedReal::Infinity => ExtendedReal::Infinity,
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::Infinity => f.write_str("inf"),
        }
    }
}
