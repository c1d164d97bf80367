//! Scalar abstraction for the numeric core.
//!
//! All geometry, association and estimation math is generic over [`Real`],
//! which is satisfied by `f32` and `f64`. The pipeline, simulator and file
//! formats instantiate everything at `f64` (the default type parameter on
//! the core types).

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::NumCast
    + num_traits::FloatConst
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: num_traits::Float
        + num_traits::FromPrimitive
        + num_traits::NumCast
        + num_traits::FloatConst
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + Default
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` literal or config value into the working scalar type.
#[inline]
pub fn real<S: Real>(x: f64) -> S {
    S::from_f64(x).expect("f64 -> scalar conversion")
}

/// Normalizes an angle to the half-open interval `(-pi, pi]`.
pub fn normalize_angle<S: Real>(theta: S) -> S {
    let pi = S::PI();
    let two_pi = pi + pi;
    if theta > -pi && theta <= pi {
        return theta;
    }
    let mut t = theta % two_pi;
    if t <= -pi {
        t += two_pi;
    } else if t > pi {
        t -= two_pi;
    }
    t
}
