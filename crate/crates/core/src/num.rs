//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type usable for embeddings, similarities and edit costs.
///
/// Implemented for `f32` and `f64`. Text formats are parsed through `f64`
/// and narrowed with [`Scalar::from_f64_lossy`]; since the writers emit the
/// shortest round-tripping representation this is exact for both widths.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Display + LowerExp + Debug + Send + Sync + 'static
{
    /// Largest deviation of an L2 norm from one that is accepted as already
    /// normalized. Loaded vectors outside this band are rescaled.
    const UNIT_SLACK: Self;

    fn from_f64_lossy(v: f64) -> Self;

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).unwrap_or_else(Self::infinity)
    }
}

impl Scalar for f32 {
    const UNIT_SLACK: Self = 1e-6;

    fn from_f64_lossy(v: f64) -> Self {
        v as f32
    }
}

impl Scalar for f64 {
    const UNIT_SLACK: Self = 1e-12;

    fn from_f64_lossy(v: f64) -> Self {
        v
    }
}

/// `max(a, b)` without NaN propagation concerns; inputs are finite here.
#[inline]
pub(crate) fn fmax<T: Scalar>(a: T, b: T) -> T {
    if a > b {
        a
    } else {
        b
    }
}

#[inline]
pub(crate) fn fmin<T: Scalar>(a: T, b: T) -> T {
    if a < b {
        a
    } else {
        b
    }
}
