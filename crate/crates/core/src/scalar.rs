//! Scalar abstraction.
//!
//! Every numerical routine in the crate is written against [`Real`], which is
//! implemented for `f32` and `f64`. Exponent bookkeeping in
//! [`crate::exponents`] uses the looser [`crate::exponents::Exact`] bound so it
//! can also run on exact rationals.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + FftNum + Default + Debug + Display + Sum + Send + Sync
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub(crate) fn from_usize<T: Real>(k: usize) -> T {
    T::from_usize(k).expect("index representable in scalar type")
}

#[inline]
pub(crate) fn four_pi<T: Real>() -> T {
    lit::<T>(4.0) * T::PI()
}
