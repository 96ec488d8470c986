//! Scalar abstraction shared by the numeric core.
//!
//! Everything below the Monte Carlo harnesses is written against [`Scalar`]
//! so that the same code runs in `f32` and `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real floating-point type usable throughout the crate.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance floor for iterative procedures: no tighter than a few
    /// hundred ulps of the type.
    #[inline]
    fn tol_floor(requested: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(256.0);
        Self::lit(requested).max(floor)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `ln Γ(v)` evaluated in double precision.
pub(crate) fn ln_gamma<T: Scalar>(v: T) -> T {
    T::lit(statrs::function::gamma::ln_gamma(v.to_f64_lossy()))
}
