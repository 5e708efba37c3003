//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar the solver and the checks are generic over.
///
/// Implemented for `f32` and `f64`. The tolerances used by the theorem
/// checks are calibrated for `f64`; `f32` is supported for the discrete
/// operators and the solver but will not reach the tightest tolerances.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `|x|^(p-2) x` with the continuous extension `0` at `x = 0` (`p > 1`).
    #[inline]
    fn signed_pow(self, e: Self) -> Self {
        if self == Self::zero() {
            Self::zero()
        } else {
            self.signum() * self.abs().powf(e)
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Pairwise (tree) summation.
///
/// The reduction order depends only on the slice length, so results are
/// bit-reproducible, and the rounding error grows like `log n`.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        let mut s = T::zero();
        for &x in xs {
            s += x;
        }
        s
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Pairwise sum of `f(i)` for `i in 0..n`.
pub fn pairwise_sum_by<T: Real, F: Fn(usize) -> T>(n: usize, f: F) -> T {
    fn rec<T: Real, F: Fn(usize) -> T>(lo: usize, hi: usize, f: &F) -> T {
        if hi - lo <= 32 {
            let mut s = T::zero();
            for i in lo..hi {
                s += f(i);
            }
            s
        } else {
            let mid = lo + (hi - lo) / 2;
            rec(lo, mid, f) + rec(mid, hi, f)
        }
    }
    rec(0, n, &f)
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    pairwise_sum_by(a.len(), |i| a[i] * b[i])
}
