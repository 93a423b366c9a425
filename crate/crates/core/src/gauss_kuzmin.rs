//! The Gauss-Kuzmin problem: iterate the distribution of `T^n` started from
//! an arbitrary distribution and measure its convergence to `gamma_theta`.
//!
//! The distribution functions follow
//! `F_{n+1}(x) = sum_{i >= m} [F_n(1/(i theta)) - F_n(1/(i theta + x))]`
//! and the densities `f_n = (1 + theta x) F_n'` follow `f_{n+1} = U f_n`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Observable};
use crate::measure::{contraction_q, GammaTheta};
use crate::operator::{lipschitz_seminorm, TransferOperator};

/// Errors below this are treated as interpolation and rounding noise.
pub const NOISE_FLOOR: f64 = 1e-12;

/// Initial distribution of the iteration.
#[derive(Clone, Debug)]
pub enum StartDistribution {
    /// `F_0(x) = x / theta`.
    Uniform,
    /// `F_0 = gamma_theta`, the fixed point.
    Gamma,
    /// A distribution function sampled on the operator's grid.
    Custom(GridFunction),
}

impl StartDistribution {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::Gamma => "gamma",
            Self::Custom(_) => "custom",
        }
    }

    /// `F_0` on the operator's grid.
    pub fn cdf(&self, op: &TransferOperator) -> GridFunction {
        let t = op.theta();
        match self {
            Self::Uniform => op.sample(|x| x / t),
            Self::Gamma => {
                let g = GammaTheta::new(*op.params());
                op.sample(|x| g.cdf_unchecked(x))
            }
            Self::Custom(f) => op.sample(|x| f.eval(x)),
        }
    }

    /// `f_0 = (1 + theta x) F_0'` on the operator's grid.
    pub fn density(&self, op: &TransferOperator) -> GridFunction {
        let t = op.theta();
        match self {
            Self::Uniform => op.sample(|x| (1.0 + t * x) / t),
            Self::Gamma => {
                let l = op.params().log_normalizer();
                op.sample(|_| t / l)
            }
            Self::Custom(f) => {
                let d = f.derivative();
                op.sample(|x| (1.0 + t * x) * d.eval(x))
            }
        }
    }
}

/// Checks `F(0) = 0`, `F(theta) = 1` and monotonicity on the dense grid.
pub fn validate_cdf(f: &GridFunction) -> Result<()> {
    const TOL: f64 = 1e-10;
    let at0 = f.eval(0.0);
    let at1 = f.eval(f.theta());
    if at0.abs() > TOL || (at1 - 1.0).abs() > TOL {
        return Err(Error::NotACdf(format!(
            "needs F(0) = 0 and F(theta) = 1, got {at0} and {at1}"
        )));
    }
    let pts = f.dense_points();
    let mut prev = at0;
    for &x in &pts[1..] {
        let v = f.eval(x);
        if !v.is_finite() || v < prev - TOL {
            return Err(Error::NotACdf(format!("decreases near x = {x}")));
        }
        prev = v;
    }
    Ok(())
}

/// `F_0, F_1, ..., F_n`.
pub fn iterate_cdf(op: &TransferOperator, f0: &GridFunction, n: usize) -> Result<Vec<GridFunction>> {
    validate_cdf(f0)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(op.sample(|x| f0.eval(x)));
    for k in 0..n {
        let next = op.gk_step(&out[k]);
        out.push(next);
    }
    Ok(out)
}

/// `f_0, U f_0, ..., U^n f_0`.
pub fn iterate_density(op: &TransferOperator, f0: &GridFunction, n: usize) -> Result<Vec<GridFunction>> {
    if f0.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidDensity("non-finite sample".into()));
    }
    let mut out = Vec::with_capacity(n + 1);
    out.push(op.sample(|x| f0.eval(x)));
    for k in 0..n {
        let next = op.apply_u(&out[k]);
        out.push(next);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub n: usize,
    /// `sup |F_n - F_limit|` on the dense grid.
    pub sup_error: f64,
    /// `sup_error(n) / sup_error(n-1)`.
    pub ratio: Option<f64>,
    /// `max |f_n'|`.
    #[serde(rename = "M_n")]
    pub m_n: f64,
    /// `max(|R_n(0)|, |R_n(theta)|)` where `R_n = F_n - F_limit`.
    pub endpoint_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayChecks {
    /// `sup_error` strictly decreases until it first drops below the noise floor.
    pub monotone_until_floor: bool,
    /// First `n` with `sup_error < NOISE_FLOOR`.
    pub floor_reached_at: Option<usize>,
    /// Largest `sup_error` ratio over `n >= 2` with the previous error above the floor.
    pub max_ratio_above_floor: Option<f64>,
    /// `max_ratio_above_floor <= q + 0.02`.
    pub ratios_within_q: bool,
    /// `max_n (M_{n+1} - q M_n)`.
    pub lipschitz_excess: f64,
    /// `M_{n+1} <= q M_n + 1e-8` for every reported `n`.
    pub lipschitz_contraction: bool,
    pub max_endpoint_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub m: u64,
    pub start: String,
    pub degree: usize,
    pub q_reference: f64,
    pub noise_floor: f64,
    pub rows: Vec<DecayRow>,
    pub checks: DecayChecks,
}

/// Runs both iterations for `n` steps and compares each `F_k` with the limit
/// `log((m theta + x) theta) / log(1 + theta^2)`.
pub fn decay_report(op: &TransferOperator, start: &StartDistribution, n: usize) -> Result<DecayReport> {
    let params = *op.params();
    let gamma = GammaTheta::new(params);
    let (q, _) = contraction_q(&params, 1e-13)?;
    let q = q.value;
    let cdfs = iterate_cdf(op, &start.cdf(op), n)?;
    let densities = iterate_density(op, &start.density(op), n)?;
    let limit = |x: f64| gamma.gk_limit_cdf(x).expect("grid points lie in [0, theta]");
    let t = params.theta();

    let mut rows: Vec<DecayRow> = Vec::with_capacity(n + 1);
    for (k, (f, d)) in cdfs.iter().zip(&densities).enumerate() {
        let sup_error = f.sup_distance(limit);
        let ratio = rows.last().map(|r| sup_error / r.sup_error);
        let endpoint_residual = (f.eval(0.0) - limit(0.0))
            .abs()
            .max((f.eval(t) - limit(t)).abs());
        rows.push(DecayRow {
            n: k,
            sup_error,
            ratio,
            m_n: lipschitz_seminorm(d),
            endpoint_residual,
        });
    }

    let floor_reached_at = rows.iter().position(|r| r.sup_error < NOISE_FLOOR);
    let stop = floor_reached_at.unwrap_or(rows.len() - 1);
    let monotone_until_floor = rows[..=stop]
        .windows(2)
        .all(|w| w[1].sup_error < w[0].sup_error);
    let max_ratio_above_floor = rows
        .windows(2)
        .filter(|w| w[1].n >= 2 && w[0].sup_error >= NOISE_FLOOR)
        .filter_map(|w| w[1].ratio)
        .reduce(f64::max);
    let lipschitz_excess = rows
        .windows(2)
        .map(|w| w[1].m_n - q * w[0].m_n)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_endpoint_residual = rows.iter().map(|r| r.endpoint_residual).fold(0.0, f64::max);
    Ok(DecayReport {
        m: params.m(),
        start: start.label().to_string(),
        degree: op.config().degree,
        q_reference: q,
        noise_floor: NOISE_FLOOR,
        checks: DecayChecks {
            monotone_until_floor,
            floor_reached_at,
            ratios_within_q: max_ratio_above_floor.map_or(true, |r| r <= q + 0.02),
            max_ratio_above_floor,
            lipschitz_contraction: lipschitz_excess <= 1e-8,
            lipschitz_excess,
            max_endpoint_residual,
        },
        rows,
    })
}

/// Pointwise derivative check between one CDF step and one density step:
/// `(1 + theta x) (F_{n+1})'(x)` against `U f_n` on the dense grid.
pub fn step_consistency(op: &TransferOperator, cdf: &GridFunction) -> f64 {
    let t = op.theta();
    let next = op.gk_step(cdf);
    let dens = cdf.derivative().map(|x, v| (1.0 + t * x) * v);
    let stepped = op.apply_u(&dens);
    let d = next.derivative();
    d.dense_points()
        .into_iter()
        .map(|x| ((1.0 + t * x) * d.value(x) - stepped.value(x)).abs())
        .fold(0.0, f64::max)
}
