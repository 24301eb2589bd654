use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Real floating-point type the scattering code is written against.
///
/// Implemented for `f32` and `f64`. The acceptance tolerances assume `f64`;
/// `f32` is useful for quick exploratory sweeps.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + FftNum + Default + Send + Sync + Debug + Display + 'static
{
    /// Converts an `f64` literal into this type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into this type.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub(crate) fn cplx<T: Scalar>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

pub(crate) fn real<T: Scalar>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// The imaginary unit.
pub(crate) fn imag_unit<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}
