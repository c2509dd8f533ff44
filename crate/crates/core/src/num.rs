//! Scalar abstraction for the numerical core.

use std::fmt::Display;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar the toolkit is generic over (`f32` or `f64`).
///
/// `FftNum` is part of the bound because every signal path ends up in an FFT
/// sooner or later; it also carries `Send + Sync + Debug + 'static`.
pub trait Scalar:
    Float + FloatConst + NumAssign + FromPrimitive + ToPrimitive + Display + Default + FftNum
{
}

impl<T> Scalar for T where
    T: Float + FloatConst + NumAssign + FromPrimitive + ToPrimitive + Display + Default + FftNum
{
}

/// Converts an `f64` literal or intermediate into `T`.
///
/// Infallible for the `f32`/`f64` instantiations this crate supports.
#[inline]
pub fn cast<T: Scalar>(value: f64) -> T {
    T::from_f64(value).expect("f64 -> Scalar conversion")
}

/// Converts a `usize` count into `T`.
#[inline]
pub fn cast_usize<T: Scalar>(value: usize) -> T {
    T::from_usize(value).expect("usize -> Scalar conversion")
}
