//! Numeric helpers shared by the oracles and the experiment harness.
//!
//! Ratios and harmonic numbers are generic over [`Scalar`], so they can be
//! evaluated in floating point or exactly over big rationals.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

pub trait Scalar: Num + FromPrimitive + ToPrimitive + Clone + PartialOrd + Debug {}

impl<T> Scalar for T where T: Num + FromPrimitive + ToPrimitive + Clone + PartialOrd + Debug {}

pub fn from_count<T: Scalar>(v: usize) -> T {
    T::from_usize(v).expect("count representable in scalar type")
}

/// `num / den` in the requested scalar type.
pub fn quotient<T: Scalar>(num: usize, den: usize) -> T {
    from_count::<T>(num) / from_count::<T>(den)
}

pub fn mean<T: Float>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    let sum = xs.iter().fold(T::zero(), |acc, &x| acc + x);
    Some(sum / T::from(xs.len()).unwrap())
}

pub fn median<T: Float>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("median of NaN"));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        Some(v[mid])
    } else {
        Some((v[mid - 1] + v[mid]) / T::from(2).unwrap())
    }
}

pub fn max<T: Float>(xs: &[T]) -> Option<T> {
    xs.iter().copied().reduce(T::max)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope<T: Float>(points: &[(T, T)]) -> Option<T> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(T, T)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = T::from(logs.len()).unwrap();
    let mx = logs.iter().fold(T::zero(), |a, p| a + p.0) / n;
    let my = logs.iter().fold(T::zero(), |a, p| a + p.1) / n;
    let sxy = logs
        .iter()
        .fold(T::zero(), |a, p| a + (p.0 - mx) * (p.1 - my));
    let sxx = logs
        .iter()
        .fold(T::zero(), |a, p| a + (p.0 - mx) * (p.0 - mx));
    if sxx == T::zero() {
        None
    } else {
        Some(sxy / sxx)
    }
}
