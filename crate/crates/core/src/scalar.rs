//! Scalar abstraction for the numerical kernels.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};

/// Floating-point scalar the solvers are generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for converting an `f64` literal into the working scalar.
#[inline]
pub(crate) fn cast<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal must convert into the scalar type")
}

/// Converts a signed wavenumber into the working scalar.
#[inline]
pub(crate) fn cast_i64<T: Real>(k: i64) -> T {
    T::from_i64(k).expect("wavenumber must convert into the scalar type")
}
