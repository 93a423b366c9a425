//! The integer `m` and the irrational `theta = 1/sqrt(m)` that fix an expansion.

use num_integer::Roots;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qtheta::QThetaNumber;

/// Parameters of a theta-expansion: `theta^2 = 1/m` with `m >= 2` not a square.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaParams {
    m: u64,
    theta: f64,
}

impl ThetaParams {
    pub fn new(m: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::MTooSmall(m));
        }
        let r = m.sqrt();
        if r * r == m {
            return Err(Error::PerfectSquare(m));
        }
        Ok(Self {
            m,
            theta: (m as f64).sqrt().recip(),
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `theta` as an exact element `0 + 1*theta` of Q(theta).
    pub fn theta_exact(&self) -> QThetaNumber {
        QThetaNumber::theta(self.m)
    }

    /// `log(1 + theta^2)`, the normalizer of the invariant measure.
    pub fn log_normalizer(&self) -> f64 {
        (1.0 / self.m as f64).ln_1p()
    }

    /// Checks a float point against `[0, theta]` with a few ulps of slack,
    /// returning it clamped into the interval.
    pub fn check_point(&self, x: f64) -> Result<f64> {
        let slack = 4.0 * f64::EPSILON * self.theta;
        if !x.is_finite() || x < -slack || x > self.theta + slack {
            return Err(Error::Domain {
                value: x,
                theta: self.theta,
            });
        }
        Ok(x.clamp(0.0, self.theta))
    }

    pub(crate) fn check_digit(&self, digit: u64, position: usize) -> Result<()> {
        if digit < self.m {
            Err(Error::DigitBelowMinimum {
                digit,
                position,
                m: self.m,
            })
        } else {
            Ok(())
        }
    }
}
