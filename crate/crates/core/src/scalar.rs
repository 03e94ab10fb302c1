use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar the whole crate is generic over. In practice `f32` or `f64`.
///
/// Tolerances throughout the crate are written as `f64` literals tuned for double
/// precision; [`Real::tol`] widens them to a small multiple of machine epsilon
/// when the scalar cannot resolve them.
pub trait Real:
    RealField + Copy + Debug + Display + FromPrimitive + ToPrimitive + Sum + Send + Sync + 'static
{
    /// Converts an `f64` constant into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// A tolerance of `base`, floored at 128 ulps of one.
    #[inline]
    fn tol(base: f64) -> Self {
        let floor = Self::default_epsilon() * Self::lit(128.0);
        Self::lit(base).max(floor)
    }

    /// Lossy conversion for diagnostics and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `x` clamped to `[-1, 1]`, the domain of `acos`.
    #[inline]
    fn clamp_unit(self) -> Self {
        self.clamp(-Self::one(), Self::one())
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `acos` with the argument clamped to `[-1, 1]`.
#[inline]
pub fn safe_acos<T: Real>(x: T) -> T {
    x.clamp_unit().acos()
}
