//! Scalar abstraction for the model math.
//!
//! Everything analytic (demand curves, expenditures, Gaussian outcome
//! probabilities, quadrature) is generic over [`Real`] so the same formulas
//! run in `f32` or `f64`. Type parameters default to `f64`, which is what the
//! simulation engine and the CLI use.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

use crate::math::erf;

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static {
    fn erf(self) -> Self;
    fn erfc(self) -> Self;

    /// Lossy conversion from an `f64` constant.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant not representable")
    }

    /// Lossy conversion to `f64`, for reporting and error payloads.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    #[inline]
    fn erf(self) -> f64 {
        erf::erf(self)
    }

    #[inline]
    fn erfc(self) -> f64 {
        erf::erfc(self)
    }
}

impl Real for f32 {
    #[inline]
    fn erf(self) -> f32 {
        erf::erf(self as f64) as f32
    }

    #[inline]
    fn erfc(self) -> f32 {
        erf::erfc(self as f64) as f32
    }
}
