//! Scalar abstraction: the numerics are generic over `Real`, instantiated
//! at `f32` and `f64` (aliases at the crate root).

use num_traits::Float;

/// Floating-point scalar for the library's linear algebra and schedules.
///
/// `num_traits::Float` supplies the arithmetic; the extra methods are the
/// conversions the formulas need. Implemented for `f32` and `f64` only —
/// the trait is deliberately not sealed, but the tolerance conventions
/// assume IEEE semantics.
pub trait Real:
    Float + core::fmt::Debug + core::fmt::Display + core::iter::Sum + Send + Sync + 'static
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;

    fn from_usize(v: usize) -> Self {
        Self::from_f64(v as f64)
    }

    /// A comparison tolerance that stays meaningful across precisions:
    /// `max(tol, ulps·ε)`. Tolerances in this crate are calibrated for
    /// f64; the epsilon floor keeps the same checks honest at f32.
    fn tol(tol: f64, ulps: f64) -> Self {
        let eps = Self::epsilon().to_f64();
        Self::from_f64(tol.max(ulps * eps))
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> f64 {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    fn from_f64(v: f64) -> f32 {
        v as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}
