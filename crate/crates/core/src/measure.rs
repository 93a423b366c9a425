//! The invariant measure `gamma_theta` and the scalar constants derived
//! from it.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ThetaParams;
use crate::quadrature::{adaptive_gk15, tanh_sinh};
use crate::series::{sum_decreasing, CompensatedSum};

/// The probability measure with density `theta / ((1 + theta x) log(1 + theta^2))`
/// on `[0, theta]`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GammaTheta {
    params: ThetaParams,
    normalizer: f64,
}

impl GammaTheta {
    pub fn new(params: ThetaParams) -> Self {
        Self {
            params,
            normalizer: params.log_normalizer(),
        }
    }

    pub fn params(&self) -> &ThetaParams {
        &self.params
    }

    /// `log(1 + theta^2)`.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        let x = self.params.check_point(x)?;
        Ok(self.cdf_unchecked(x))
    }

    pub(crate) fn cdf_unchecked(&self, x: f64) -> f64 {
        (self.params.theta() * x).ln_1p() / self.normalizer
    }

    /// `log((m theta + x) theta) / log(1 + theta^2)`, the Gauss-Kuzmin limit.
    /// Written as the literal expression; it agrees with [`Self::cdf`] because
    /// `m theta^2 = 1`.
    pub fn gk_limit_cdf(&self, x: f64) -> Result<f64> {
        let x = self.params.check_point(x)?;
        let t = self.params.theta();
        Ok(((self.params.m() as f64 * t + x) * t).ln() / self.normalizer)
    }

    /// Density with respect to Lebesgue measure.
    pub fn density(&self, x: f64) -> Result<f64> {
        let x = self.params.check_point(x)?;
        let t = self.params.theta();
        Ok(t / ((1.0 + t * x) * self.normalizer))
    }

    /// Inverse distribution function, `u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        ((u * self.normalizer).exp_m1() / self.params.theta()).min(self.params.theta())
    }

    /// `gamma([a, b])`.
    pub fn measure(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.cdf(b)? - self.cdf(a)?)
    }
}

/// Probability under the invariant measure that the first digit is `k`:
/// `log(1 + 1/(k(k+2))) / log(1 + theta^2)`.
pub fn digit_law(k: u64, params: &ThetaParams) -> Result<f64> {
    params.check_digit(k, 1)?;
    Ok(digit_law_unchecked(k as f64, params.log_normalizer()))
}

pub(crate) fn digit_law_unchecked(k: f64, normalizer: f64) -> f64 {
    (1.0 / (k * (k + 2.0))).ln_1p() / normalizer
}

/// A computed constant with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Constant {
    pub value: f64,
    pub error: f64,
}

/// Levy's constant `beta = -(1/log(1+theta^2)) * int_0^theta theta log x / (1 + theta x) dx`.
///
/// On `(0, theta/2]` the factor `1/(1 + theta x)` is expanded geometrically and
/// each `x^k log x` is integrated in closed form; `[theta/2, theta]` is done by
/// adaptive Gauss-Kronrod.
pub fn levy_beta(params: &ThetaParams, tol: f64) -> Result<Constant> {
    if !(tol > 0.0) {
        return Err(Error::NonPositive { what: "tolerance" });
    }
    let t = params.theta();
    let l = params.log_normalizer();
    let c = 0.5 * t;
    let ln_c = c.ln();
    // int_0^c x^k ln x dx = c^(k+1) (ln c/(k+1) - 1/(k+1)^2)
    let mut near = CompensatedSum::new();
    let mut power = c; // c^(k+1) (-theta)^k
    let mut k = 0u32;
    loop {
        let kp = f64::from(k + 1);
        let term = power * (ln_c / kp - 1.0 / (kp * kp));
        near.add(term);
        if term.abs() < 1e-18 * near.value().abs() {
            break;
        }
        power *= -t * c;
        k += 1;
    }
    let budget = 0.5 * tol * l / t;
    let far = adaptive_gk15(|x| x.ln() / (1.0 + t * x), c, t, budget)?;
    let integral = near.value() + far.value;
    Ok(Constant {
        value: -t * integral / l,
        error: t * far.error / l + 4.0 * f64::EPSILON * (t * integral / l).abs(),
    })
}

/// Rohlin's entropy integral `int (-log x^2) d gamma`, evaluated by tanh-sinh
/// quadrature as an independent route to `2 beta`.
pub fn rohlin_entropy(params: &ThetaParams, tol: f64) -> Result<Constant> {
    if !(tol > 0.0) {
        return Err(Error::NonPositive { what: "tolerance" });
    }
    let t = params.theta();
    let l = params.log_normalizer();
    let e = tanh_sinh(|x| -2.0 * x.ln() * t / ((1.0 + t * x) * l), 0.0, t, tol)?;
    Ok(Constant {
        value: e.value,
        error: e.error,
    })
}

/// Entropy of the map, `2 beta`.
pub fn entropy(params: &ThetaParams, tol: f64) -> Result<Constant> {
    let b = levy_beta(params, 0.5 * tol)?;
    Ok(Constant {
        value: 2.0 * b.value,
        error: 2.0 * b.error,
    })
}

/// Almost sure limit of `(a_1 ... a_n)^(1/n)`:
/// `exp((1/log(1+theta^2)) * sum_{k >= m} log k * log(1 + 1/(k(k+2))))`.
pub fn khintchin_product(params: &ThetaParams, tol: f64) -> Result<Constant> {
    if !(tol > 0.0) {
        return Err(Error::NonPositive { what: "tolerance" });
    }
    let l = params.log_normalizer();
    let m = params.m();
    let term = |k: f64| k.ln() * (1.0 / (k * (k + 2.0))).ln_1p();
    // exp amplifies the error of s by the value itself, so size it first
    let rough = sum_decreasing(term, m, m.max(4), 1e-6)?;
    let s_tol = tol * l / (2.0 * (rough.value / l).exp());
    let s = sum_decreasing(term, m, m.max(4), s_tol)?;
    let value = (s.value / l).exp();
    Ok(Constant {
        value,
        error: value * (s.error / l) + 8.0 * f64::EPSILON * value,
    })
}

/// Variation contraction constant `k_m = 1/(m+1)`.
pub fn contraction_km(params: &ThetaParams) -> Ratio<u64> {
    Ratio::new(1, params.m() + 1)
}

/// Lipschitz contraction constant
/// `q = m * sum_{i >= m} (m/(i^3 (i+1)) + (i+1-m)/(i (i+1)^3))`,
/// together with the flag `q < theta`.
pub fn contraction_q(params: &ThetaParams, tol: f64) -> Result<(Constant, bool)> {
    let m = params.m() as f64;
    let term = |i: f64| m / (i.powi(3) * (i + 1.0)) + (i + 1.0 - m) / (i * (i + 1.0).powi(3));
    // both parts are decreasing once i >= 2m
    let s = sum_decreasing(term, params.m(), 2 * params.m(), tol / m)?;
    let q = Constant {
        value: m * s.value,
        error: m * s.error + 8.0 * f64::EPSILON * m * s.value,
    };
    Ok((q, q.value < params.theta()))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConstantTolerances {
    pub requested: f64,
    pub beta: f64,
    pub entropy: f64,
    pub khintchin_geo: f64,
    pub q: f64,
    /// `|entropy - rohlin integral|`, two independent quadratures.
    pub entropy_crosscheck: f64,
}

/// Every scalar constant for one `m`, with the errors actually achieved.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantsReport {
    pub m: u64,
    pub theta: f64,
    pub beta: f64,
    pub entropy: f64,
    pub entropy_rohlin: f64,
    pub khintchin_geo: f64,
    /// `1/(m+1)` as an exact fraction string.
    pub k_m: String,
    pub q: f64,
    pub q_lt_theta: bool,
    pub tolerances: ConstantTolerances,
}

pub fn constants_report(params: &ThetaParams, tol: f64) -> Result<ConstantsReport> {
    let beta = levy_beta(params, tol)?;
    let ent = entropy(params, tol)?;
    let rohlin = rohlin_entropy(params, tol)?;
    let khin = khintchin_product(params, tol)?;
    let (q, q_lt_theta) = contraction_q(params, tol)?;
    let km = contraction_km(params);
    Ok(ConstantsReport {
        m: params.m(),
        theta: params.theta(),
        beta: beta.value,
        entropy: ent.value,
        entropy_rohlin: rohlin.value,
        khintchin_geo: khin.value,
        k_m: format!("{}/{}", km.numer(), km.denom()),
        q: q.value,
        q_lt_theta,
        tolerances: ConstantTolerances {
            requested: tol,
            beta: beta.error,
            entropy: ent.error,
            khintchin_geo: khin.error,
            q: q.error,
            entropy_crosscheck: (ent.value - rohlin.value).abs(),
        },
    })
}
