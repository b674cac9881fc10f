//! Floating-point scalar abstraction shared by the geometry, TTC and metric code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// A real scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + Sum + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Round half away from zero to the nearest `i64`.
    #[inline]
    fn round_i64(self) -> i64 {
        self.round().to_i64().unwrap_or(if self > Self::zero() { i64::MAX } else { i64::MIN })
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
