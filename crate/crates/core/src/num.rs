//! Floating-point scalar abstraction so the numeric parts of the toolkit
//! work with either `f32` or `f64`.

use std::fmt;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + fmt::Debug
    + fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
    fn from_f64_lossy(x: f64) -> Self;

    fn as_f64(self) -> f64;
}

impl Real for f32 {
    fn from_f64_lossy(x: f64) -> Self {
        x as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn from_f64_lossy(x: f64) -> Self {
        x
    }

    fn as_f64(self) -> f64 {
        self
    }
}

/// Shorthand for `R::from_f64_lossy` in expression position.
pub fn real<R: Real>(x: f64) -> R {
    R::from_f64_lossy(x)
}

/// Converts a count to a scalar.
pub fn real_usize<R: Real>(n: usize) -> R {
    R::from_usize(n).unwrap_or_else(|| real(n as f64))
}
