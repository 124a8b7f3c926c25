//! Scalar abstraction shared by the linear-algebra modules.

use std::fmt;

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::ToPrimitive;

/// Real scalar for covariance matrices and propagators: `f32` or `f64`.
///
/// Conversions go through `f64`, which is the precision of every literal
/// constant in this crate.
pub trait Real: RealField + Copy + ToPrimitive + fmt::LowerExp + Send + Sync {
    /// Machine epsilon, as `f64`.
    const EPSILON: f64;

    fn of(x: f64) -> Self;

    /// A tolerance of `x`, widened to what the precision can resolve after
    /// `O(L)` accumulated roundings.
    fn tol(x: f64) -> Self {
        Self::of(x.max(1e3 * Self::EPSILON))
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[allow(clippy::eq_op)]
    fn is_nan(self) -> bool {
        self != self
    }
}

impl Real for f32 {
    const EPSILON: f64 = f32::EPSILON as f64;

    fn of(x: f64) -> Self {
        x as f32
    }
}

impl Real for f64 {
    const EPSILON: f64 = f64::EPSILON;

    fn of(x: f64) -> Self {
        x
    }
}

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub(crate) fn norm_sqr<T: Real>(z: C<T>) -> T {
    z.re * z.re + z.im * z.im
}

#[inline]
pub(crate) fn cabs<T: Real>(z: C<T>) -> T {
    norm_sqr(z).sqrt()
}
