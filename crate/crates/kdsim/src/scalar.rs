//! Floating-point scalar abstraction.
//!
//! All dense quantum-state and quasiprobability code in this crate is generic
//! over a real scalar type. The polytope module is the exception: it works in
//! exact rational arithmetic because facet identities and infeasibility
//! certificates are brittle under rounding.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex number over a [`Scalar`].
pub type C<T> = Complex<T>;

/// Converts an `f64` constant into the working scalar type.
///
/// Panics only if `T` cannot represent finite `f64` values, which cannot
/// happen for the two implementors.
#[inline]
pub fn real<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 converts to scalar")
}

/// `2^{-n/2}`, the magnitude of every overlap between the computational and
/// character bases on `n` qubits.
#[inline]
pub fn inv_sqrt_dim<T: Scalar>(n: usize) -> T {
    real::<T>(0.5).powf(real::<T>(n as f64 / 2.0))
}
