//! Scalar abstraction so the numeric core works at any floating precision.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::{Product, Sum};

use num_traits::{Float, NumAssign};

/// Floating-point scalar the whole crate is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + NumAssign + Sum + Product + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, for literals and tolerances.
    fn from_f64(v: f64) -> Self;

    /// Widening to `f64` for reporting.
    fn as_f64(self) -> f64;

    fn from_usize(v: usize) -> Self {
        Self::from_f64(v as f64)
    }
}

impl Scalar for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn as_f64(self) -> f64 {
        self
    }
}
