//! Scalar abstraction shared by every solver in the crate.
//!
//! All numerical code is written against [`Scalar`], implemented for `f32`
//! and `f64`. Constants are lifted with [`cast`].

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

/// Floating point type usable by the solvers.
pub trait Scalar:
    'static
    + Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Send
    + Sync
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn cast<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count into `T`.
#[inline]
pub fn count<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

/// Lossy view of `x` as `f64`, used for error messages and reports.
#[inline]
pub fn as_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn two_pi<T: Scalar>() -> T {
    T::PI() + T::PI()
}

const LEAF: usize = 16;

/// Sum with a fixed binary reduction tree.
///
/// The grouping depends only on `xs.len()`, so the result is bitwise
/// reproducible no matter how the caller schedules work.
pub fn tree_sum<T: Scalar>(xs: &[T]) -> T {
    if xs.len() <= LEAF {
        let mut acc = T::zero();
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    tree_sum(&xs[..mid]) + tree_sum(&xs[mid..])
}

/// [`tree_sum`] over a mapped sequence, materialized first.
pub fn tree_sum_by<T: Scalar, I, F>(items: I, f: F) -> T
where
    I: IntoIterator,
    F: FnMut(I::Item) -> T,
{
    let buf: Vec<T> = items.into_iter().map(f).collect();
    tree_sum(&buf)
}

/// `true` if `xs` is strictly increasing.
pub fn strictly_increasing<T: Scalar>(xs: &[T]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}
