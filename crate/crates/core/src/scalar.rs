//! Scalar abstraction shared by every evaluator and algorithm.
//!
//! All set-function values, multilinear points and thresholds are carried in
//! a type implementing [`Scalar`]. `f64` is the workhorse; `f32` is supported
//! for memory-bound sweeps.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar used for objective values.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Scalar for f64 {}
impl Scalar for f32 {}

/// Product of `factors` taken in ascending order.
///
/// The result depends only on the multiset of factors, so two evaluations that
/// see the same factors in a different order agree bit-for-bit.
pub fn canonical_product<T: Scalar>(factors: &mut [T]) -> T {
    factors.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    factors.iter().fold(T::one(), |acc, &v| acc * v)
}
