//! Summation of slowly convergent positive series with a bracketed tail.

use crate::error::{Error, Result};
use crate::quadrature::tanh_sinh;

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Result of [`sum_decreasing`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    /// Bound on `|value - true sum|` from the tail bracket and its
    /// quadratures (rounding excluded).
    pub error: f64,
    /// Last index summed explicitly.
    pub last_index: u64,
}

/// Sums `g(start) + g(start + 1) + ...` for a positive `g` that is
/// non-increasing and convex on `[monotone_from, inf)`.
///
/// With `I(a)` the integral of `g` over `[a, inf)`, convexity puts the tail
/// after index `K` between `I(K+1) + g(K+1)/2` (trapezoid) and `I(K+1/2)`
/// (midpoint). `K` doubles until that bracket is narrower than `2 tol`, and
/// its midpoint is added. `I` is computed by tanh-sinh after the
/// substitution `x = a/t`.
pub fn sum_decreasing<G: Fn(f64) -> f64>(
    g: G,
    start: u64,
    monotone_from: u64,
    tol: f64,
) -> Result<SeriesSum> {
    const BUDGET: u64 = 100_000_000;
    if !(tol > 0.0) {
        return Err(Error::NonPositive { what: "tolerance" });
    }
    let tail_integral = |a: f64| {
        tanh_sinh(
            |t: f64| {
                let x = a / t;
                g(x) * a / (t * t)
            },
            0.0,
            1.0,
            0.25 * tol,
        )
    };
    let mut acc = CompensatedSum::new();
    let mut k = start;
    let mut target = monotone_from.max(start).max(16);
    loop {
        while k <= target {
            acc.add(g(k as f64));
            k += 1;
        }
        // terms up to k - 1 are in acc
        let kf = k as f64;
        let below = tail_integral(kf)?;
        let above = tail_integral(kf - 0.5)?;
        let lower = below.value + 0.5 * g(kf);
        let upper = above.value;
        if upper - lower <= 2.0 * tol {
            acc.add(0.5 * (upper + lower));
            return Ok(SeriesSum {
                value: acc.value(),
                error: 0.5 * (upper - lower).abs() + below.error.max(above.error),
                last_index: k - 1,
            });
        }
        target = target.saturating_mul(2);
        if target - start > BUDGET {
            return Err(Error::CutoffBudget {
                needed: target,
                budget: BUDGET,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basel() {
        let s = sum_decreasing(|k| 1.0 / (k * k), 1, 1, 1e-12).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 6.0;
        assert!((s.value - exact).abs() < 1e-12, "{s:?}");
        assert!(s.error <= 1e-12);
    }

    #[test]
    fn telescoping_with_late_monotonicity() {
        // 1/(k(k+1)) from k = 3 sums to 1/3
        let s = sum_decreasing(|k| 1.0 / (k * (k + 1.0)), 3, 10, 1e-13).unwrap();
        assert!((s.value - 1.0 / 3.0).abs() < 1e-13, "{s:?}");
        assert!(s.last_index >= 10);
    }

    #[test]
    fn log_weighted_terms() {
        // sum ln k / k^2 = -zeta'(2) = 0.93754825431584375370...
        let s = sum_decreasing(|k| k.ln() / (k * k), 2, 2, 1e-11).unwrap();
        assert!((s.value - 0.937_548_254_315_843_8).abs() < 1e-11, "{s:?}");
    }

    #[test]
    fn bracket_is_tight_for_slow_tails() {
        // sum 1/k^2 has a tail ~ 1/K, far above tol, yet K stays small
        let s = sum_decreasing(|k| 1.0 / (k * k), 1, 1, 1e-14).unwrap();
        assert!((s.value - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-14, "{s:?}");
        assert!(s.last_index < 100_000, "{s:?}");
    }

    #[test]
    fn compensated_sum_keeps_small_terms() {
        let s: CompensatedSum = [1e16, 1.0, -1e16, 1.0].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }
}
