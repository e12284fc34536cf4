//! Scalar abstraction shared by every module.
//!
//! All numerics are written against [`Real`], which is implemented for `f32`
//! and `f64`. Tolerances are specified as `f64` literals and lifted through
//! [`lit`]; [`tol_floor`] keeps them meaningful for single precision.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FloatConst, ToPrimitive};

/// Floating point scalar usable by the toolkit.
pub trait Real:
    RealField + Copy + FloatConst + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Lift an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Lossy conversion back to `f64`, used for reports and serialization.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `max(x, 64·ε_T)`: a requested tolerance that never drops below what `T`
/// can actually resolve.
#[inline]
pub fn tol_floor<T: Real>(x: f64) -> T {
    let floor = T::default_epsilon() * lit::<T>(64.0);
    let x = lit::<T>(x);
    if x > floor {
        x
    } else {
        floor
    }
}
