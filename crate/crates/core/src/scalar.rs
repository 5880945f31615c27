//! Scalar abstraction shared by the numeric kernels.
//!
//! Quadrature rules, normal-distribution helpers, the distance functionals and
//! the dominance integrals are written against [`Real`] so they run in `f32`
//! or `f64`. Simulation code (point configurations, samplers) is `f64` only.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Shorthand for converting a literal; panics only for values outside the
    /// target range, which never happens for the constants used here.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal out of range")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count out of range")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Correctly rounded sum of a sequence of floats (Shewchuk's partials
/// algorithm). The result does not depend on the order of the terms, which
/// makes statistic values and difference operators bit-reproducible under
/// reordering.
pub fn exact_sum<T: Real, I: IntoIterator<Item = T>>(terms: I) -> T {
    let mut partials: Vec<T> = Vec::new();
    let mut special = T::zero();
    let mut has_special = false;
    for mut x in terms {
        if !x.is_finite() {
            special = special + x;
            has_special = true;
            continue;
        }
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != T::zero() {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    if has_special {
        return special;
    }
    // Round the partials to a single value, handling the half-way case.
    let mut n = partials.len();
    if n == 0 {
        return T::zero();
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = T::zero();
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != T::zero() {
            break;
        }
    }
    if n > 0
        && ((lo < T::zero() && partials[n - 1] < T::zero())
            || (lo > T::zero() && partials[n - 1] > T::zero()))
    {
        let y = lo * T::lit(2.0);
        let x = hi + y;
        let yr = x - hi;
        if y == yr {
            hi = x;
        }
    }
    hi
}

/// Pairwise (tree) summation with a fixed reduction order.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().copied().fold(T::zero(), |a, b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// A numeric value together with its Monte Carlo standard error (zero for
/// deterministic quadrature results).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Estimate<T> {
    pub value: T,
    pub se: T,
}

impl<T: Real> Estimate<T> {
    pub fn exact(value: T) -> Self {
        Self { value, se: T::zero() }
    }

    pub fn new(value: T, se: T) -> Self {
        Self { value, se }
    }

    /// `|self - other| <= k * combined standard error`, with an absolute floor
    /// for the deterministic-vs-deterministic case.
    pub fn agrees_with(&self, other: &Self, k: T, floor: T) -> bool {
        let se = (self.se * self.se + other.se * other.se).sqrt();
        (self.value - other.value).abs() <= k * se + floor
    }
}

/// Sample mean and the standard error of the mean.
pub fn mean_and_se<T: Real>(xs: &[T]) -> Estimate<T> {
    let n = xs.len();
    if n == 0 {
        return Estimate::exact(T::zero());
    }
    let nf = T::from_usize_lossy(n);
    let mean = pairwise_sum(xs) / nf;
    if n == 1 {
        return Estimate::exact(mean);
    }
    let ss: Vec<T> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&ss) / (nf - T::one());
    Estimate::new(mean, (var / nf).sqrt())
}
