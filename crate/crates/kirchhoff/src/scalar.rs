use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, RemAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, NumCast, ToPrimitive};

use crate::dd::DoubleDouble;

/// Scalar field the numerical kernels are generic over.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumCast
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + RemAssign
    + 'static
{
    /// Converts an `f64` literal; exact for every implementor.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal")
    }

    #[inline]
    fn f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
impl Real for DoubleDouble {}

#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let tau = T::TAU();
    let r = x - tau * (x / tau).floor();
    if r >= tau || r < T::zero() {
        T::zero()
    } else {
        r
    }
}

/// Signed distance between two angles, in `(-π, π]`.
pub fn angle_diff<T: Real>(a: T, b: T) -> T {
    let d = wrap_angle(a - b);
    if d > T::PI() {
        d - T::TAU()
    } else {
        d
    }
}

/// Removes `2π` jumps from a sampled angle so consecutive values differ by
/// less than `π`.
pub fn unwrap_phases<T: Real>(angles: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(angles.len());
    let mut offset = T::zero();
    let mut prev: Option<T> = None;
    for &a in angles {
        if let Some(p) = prev {
            let d = a - p;
            if d > T::PI() {
                offset -= T::TAU();
            } else if d < -T::PI() {
                offset += T::TAU();
            }
        }
        prev = Some(a);
        out.push(a + offset);
    }
    out
}
