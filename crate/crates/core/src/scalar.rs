//! Floating-point abstraction shared by the geometry, channel and capacity kernels.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar used by the generic kernels: `f32` or `f64`.
pub trait Scalar: Float + FloatConst + FromPrimitive + Default + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion back to `f64` (used for reporting).
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_two_pi<T: Scalar>(angle: T) -> T {
    let tau = T::TAU();
    let wrapped = angle - tau * (angle / tau).floor();
    // floor rounding can land exactly on 2π for tiny negative inputs
    if wrapped >= tau || wrapped < T::zero() {
        T::zero()
    } else {
        wrapped
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_pi<T: Scalar>(angle: T) -> T {
    let w = wrap_two_pi(angle);
    if w > T::PI() {
        w - T::TAU()
    } else {
        w
    }
}
