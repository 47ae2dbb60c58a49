//! Bookkeeping for the geometric recursion
//! `a_{k+1} <= s^k a_1 + sum_{i=1}^k s^{k+1-i} b_i`, `s = sqrt(2 eps0)`.
//!
//! Sequences are stored from index one: `a[0]` is `a_1` and `b[0]` is `b_1`.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Relative slack when comparing a sequence with its bound.
pub const BOUND_TOL: f64 = 1e-12;

fn ratio(eps0: f64) -> Result<f64> {
    if !(eps0 > 0.0 && eps0 < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "eps0 must lie in (0, 1/2), got {eps0}"
        )));
    }
    Ok((2.0 * eps0).sqrt())
}

/// Bounds on `a_2, ..., a_{k_max+1}`.
pub fn recursion_bounds(a1: f64, b: &[f64], eps0: f64, k_max: usize) -> Result<Vec<f64>> {
    let s = ratio(eps0)?;
    if b.len() < k_max {
        return Err(Error::InvalidArgument(format!(
            "need {k_max} terms of b, got {}",
            b.len()
        )));
    }
    // bound_{k+1} = s (bound_k + b_k) unrolls to the closed form
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut v = s.powi(k as i32) * a1;
        for i in 1..=k {
            v += s.powi((k + 1 - i) as i32) * b[i - 1];
        }
        out.push(v);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationCheck {
    /// Bounds on `a_2, a_3, ...`.
    pub bounds: Vec<f64>,
    /// Smallest `k >= 2` with `a_k` above its bound.
    pub first_violation: Option<usize>,
    /// `max (a_k - bound_k)` over the checked range.
    pub worst_excess: f64,
}

/// Compare a measured sequence `a_1, a_2, ...` against the recursion.
pub fn check_sequence(a: &[f64], b: &[f64], eps0: f64) -> Result<IterationCheck> {
    if a.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let k_max = (a.len() - 1).min(b.len());
    let bounds = recursion_bounds(a[0], b, eps0, k_max)?;
    let mut first = None;
    let mut worst = f64::NEG_INFINITY;
    for (k, &bound) in bounds.iter().enumerate() {
        let ak = a[k + 1];
        worst = worst.max(ak - bound);
        if first.is_none() && ak > bound + BOUND_TOL * bound.abs().max(ak.abs()) {
            first = Some(k + 2);
        }
    }
    Ok(IterationCheck {
        bounds,
        first_violation: first,
        worst_excess: worst,
    })
}

/// `sum_{k>=1} M^{kq} a_k` for a finite sequence.
pub fn weighted_sum(a: &[f64], mq: f64) -> f64 {
    a.iter()
        .enumerate()
        .map(|(k, &v)| mq.powi(k as i32 + 1) * v)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedBound {
    /// `r = M^q sqrt(2 eps0)`.
    pub r: f64,
    /// `(r / (1 - r)) (a_1 / sqrt(2 eps0) + sum_i M^{iq} b_i)`.
    pub closed_form: f64,
}

/// Closed-form bound on `sum_k M^{kq} a_k` obtained by summing the
/// recursion; with `r = 1/2` it reads `a_1 / sqrt(2 eps0) + sum M^{iq} b_i`.
pub fn weighted_sum_bound(a1: f64, b: &[f64], eps0: f64, mq: f64) -> Result<WeightedBound> {
    let s = ratio(eps0)?;
    let r = mq * s;
    if !(mq > 0.0 && r <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < M^q and M^q sqrt(2 eps0) <= 1/2, got M^q = {mq}, product {r}"
        )));
    }
    let tail: f64 = weighted_sum(b, mq);
    Ok(WeightedBound {
        r,
        closed_form: r / (1.0 - r) * (a1 / s + tail),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_forcing_is_geometric() {
        let b = [0.0; 5];
        let bounds = recursion_bounds(1.0, &b, 0.125, 5).unwrap();
        for (k, v) in bounds.iter().enumerate() {
            assert_eq!(*v, 0.5f64.powi(k as i32 + 1));
        }
    }

    #[test]
    fn half_ratio_closed_form() {
        let b = [0.1, 0.05, 0.02];
        let w = weighted_sum_bound(0.3, &b, 0.125, 1.0).unwrap();
        assert!((w.closed_form - (0.3 / 0.5 + 0.17)).abs() < 1e-15);
    }

    #[test]
    fn flags_first_violation() {
        let s = 0.5;
        let b = [0.1, 0.2, 0.1, 0.05];
        let mut a = vec![1.0];
        for k in 0..4 {
            let next = s * (a[k] + b[k]);
            a.push(next);
        }
        assert_eq!(check_sequence(&a, &b, 0.125).unwrap().first_violation, None);
        a[2] *= 1.01;
        assert_eq!(check_sequence(&a, &b, 0.125).unwrap().first_violation, Some(3));
        assert!(matches!(recursion_bounds(1.0, &b, 0.5, 2), Err(Error::InvalidArgument(_))));
    }
}
