//! Perron-Frobenius operators of the expansion map on grid functions.
//!
//! With `u_i(x) = 1/(i theta + x)` and
//! `P_i(x) = (theta x + 1) / ((x + i theta)(x + (i+1) theta))`:
//!
//! * `U f = sum_{i >= m} P_i f(u_i)` (under `gamma_theta`),
//! * `V f = sum_{i >= m} u_i^2 f(u_i)` (under Lebesgue measure),
//! * `S f = V(f h) / h` (under the measure with density `h`).
//!
//! Branch sums run explicitly up to a cutoff `N` and the remainder
//! `sum_{i >= N} phi(i)` is replaced by its Euler-Maclaurin expansion
//! `int_N^inf phi + phi(N)/2 - phi'(N)/12`, whose integral part has a closed
//! form in the variable `u = u_t(x)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{dense_grid, GridFunction, Observable};
use crate::measure::GammaTheta;
use crate::params::ThetaParams;
use crate::quadrature::{adaptive_gk15, GaussLegendre};
use crate::series::CompensatedSum;

/// Hard limit on the explicit branch count.
pub const CUTOFF_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatorConfig {
    /// Polynomial degree of grid functions (node count minus one).
    pub degree: usize,
    /// Target for the neglected part of every branch sum.
    pub tail_tolerance: f64,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self {
            degree: 64,
            tail_tolerance: 1e-13,
        }
    }
}

impl OperatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.degree < 8 {
            return Err(Error::Config(format!(
                "grid degree must be at least 8 (got {})",
                self.degree
            )));
        }
        if !(self.tail_tolerance > 0.0 && self.tail_tolerance <= 1e-6) {
            return Err(Error::Config(format!(
                "tail tolerance must lie in (0, 1e-6] (got {:e})",
                self.tail_tolerance
            )));
        }
        Ok(())
    }
}

/// `u_i(x) = 1/(i theta + x)`.
pub fn branch_inverse(i: u64, x: f64, params: &ThetaParams) -> Result<f64> {
    params.check_digit(i, 1)?;
    let x = params.check_point(x)?;
    Ok(1.0 / (i as f64 * params.theta() + x))
}

/// `P_i(x)`, the probability of branch `i` from `x`.
pub fn branch_weight(i: u64, x: f64, params: &ThetaParams) -> Result<f64> {
    params.check_digit(i, 1)?;
    let x = params.check_point(x)?;
    Ok(weight(i as f64, x, params.theta()))
}

/// `sum_{i >= n} P_i(x) = (theta x + 1) / (theta (x + n theta))`.
pub fn weight_tail(n: u64, x: f64, params: &ThetaParams) -> f64 {
    let t = params.theta();
    (t * x + 1.0) / (t * (x + n as f64 * t))
}

fn weight(i: f64, x: f64, t: f64) -> f64 {
    (t * x + 1.0) / ((x + i * t) * (x + (i + 1.0) * t))
}

/// `sum_{i=m}^{n-1} P_i(x)` plus the closed-form tail from `n`.
pub fn weight_sum(x: f64, n: u64, params: &ThetaParams) -> f64 {
    let t = params.theta();
    let mut s: CompensatedSum = (params.m()..n).map(|i| weight(i as f64, x, t)).collect();
    s.add(weight_tail(n, x, params));
    s.value()
}

/// One summand `phi(t)` of a branch series at a fixed point, viewed as a
/// function of a continuous index.
trait Branch {
    fn term(&self, t: f64) -> f64;
    fn term_slope(&self, t: f64) -> f64;
    /// `int_n^inf phi(t) dt`.
    fn tail_integral(&self, n: f64, rule: &GaussLegendre) -> f64;
}

struct UBranch<'a, F: ?Sized> {
    f: &'a F,
    x: f64,
    theta: f64,
}

impl<F: Observable + ?Sized> Branch for UBranch<'_, F> {
    fn term(&self, t: f64) -> f64 {
        let u = 1.0 / (t * self.theta + self.x);
        weight(t, self.x, self.theta) * self.f.value(u)
    }

    fn term_slope(&self, t: f64) -> f64 {
        let th = self.theta;
        let u = 1.0 / (t * th + self.x);
        let u1 = 1.0 / ((t + 1.0) * th + self.x);
        let p = weight(t, self.x, th);
        -th * p * ((u + u1) * self.f.value(u) + u * u * self.f.slope(u))
    }

    fn tail_integral(&self, n: f64, rule: &GaussLegendre) -> f64 {
        let th = self.theta;
        let un = 1.0 / (n * th + self.x);
        (th * self.x + 1.0) / th * rule.integrate(|u| self.f.value(u) / (1.0 + th * u), 0.0, un)
    }
}

struct VBranch<'a, F: ?Sized> {
    f: &'a F,
    x: f64,
    theta: f64,
}

impl<F: Observable + ?Sized> Branch for VBranch<'_, F> {
    fn term(&self, t: f64) -> f64 {
        let u = 1.0 / (t * self.theta + self.x);
        u * u * self.f.value(u)
    }

    fn term_slope(&self, t: f64) -> f64 {
        let u = 1.0 / (t * self.theta + self.x);
        -self.theta * u * u * (2.0 * u * self.f.value(u) + u * u * self.f.slope(u))
    }

    fn tail_integral(&self, n: f64, rule: &GaussLegendre) -> f64 {
        let un = 1.0 / (n * self.theta + self.x);
        rule.integrate(|u| self.f.value(u), 0.0, un) / self.theta
    }
}

/// Summand of the Gauss-Kuzmin recursion `F(1/(i theta)) - F(1/(i theta + x))`.
struct CdfBranch<'a, F: ?Sized> {
    cdf: &'a F,
    x: f64,
    theta: f64,
}

impl<F: Observable + ?Sized> Branch for CdfBranch<'_, F> {
    fn term(&self, t: f64) -> f64 {
        let a = 1.0 / (t * self.theta);
        let b = 1.0 / (t * self.theta + self.x);
        self.cdf.value(a) - self.cdf.value(b)
    }

    fn term_slope(&self, t: f64) -> f64 {
        let a = 1.0 / (t * self.theta);
        let b = 1.0 / (t * self.theta + self.x);
        -self.theta * (a * a * self.cdf.slope(a) - b * b * self.cdf.slope(b))
    }

    fn tail_integral(&self, n: f64, rule: &GaussLegendre) -> f64 {
        if self.x == 0.0 {
            return 0.0;
        }
        let a = 1.0 / (n * self.theta);
        let b = 1.0 / (n * self.theta + self.x);
        rule.integrate(|u| self.cdf.value(u) / (u * u), b, a) / self.theta
    }
}

/// The operators `U`, `V`, `S` for one `m`, at a fixed grid degree and
/// branch cutoff.
#[derive(Clone, Debug)]
pub struct TransferOperator {
    params: ThetaParams,
    config: OperatorConfig,
    cutoff: u64,
    rule: GaussLegendre,
}

impl TransferOperator {
    pub fn new(params: ThetaParams, config: OperatorConfig) -> Result<Self> {
        config.validate()?;
        let m = params.m();
        // the first neglected Euler-Maclaurin term scales like m / N^5
        let needed = (4.0 * (m as f64 / config.tail_tolerance).powf(0.2)).ceil() as u64;
        let cutoff = needed.max(16 * m);
        if cutoff > CUTOFF_BUDGET {
            return Err(Error::CutoffBudget {
                needed: cutoff,
                budget: CUTOFF_BUDGET,
            });
        }
        Ok(Self {
            params,
            config,
            cutoff,
            rule: GaussLegendre::new(10),
        })
    }

    pub fn with_defaults(params: ThetaParams) -> Result<Self> {
        Self::new(params, OperatorConfig::default())
    }

    pub fn params(&self) -> &ThetaParams {
        &self.params
    }

    pub fn config(&self) -> &OperatorConfig {
        &self.config
    }

    /// First branch index handled by the tail expansion.
    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn theta(&self) -> f64 {
        self.params.theta()
    }

    /// A grid function sampling `f` on this operator's nodes.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> GridFunction {
        GridFunction::from_fn(self.theta(), self.config.degree, f)
    }

    fn branch_sum<B: Branch>(&self, b: &B) -> f64 {
        let n = self.cutoff;
        let mut acc: CompensatedSum = (self.params.m()..n).map(|i| b.term(i as f64)).collect();
        let nf = n as f64;
        acc.add(b.tail_integral(nf, &self.rule));
        acc.add(0.5 * b.term(nf));
        acc.add(-b.term_slope(nf) / 12.0);
        acc.value()
    }

    /// `(U f)(x)`.
    pub fn u_at<F: Observable + ?Sized>(&self, f: &F, x: f64) -> f64 {
        self.branch_sum(&UBranch {
            f,
            x,
            theta: self.theta(),
        })
    }

    /// `(V f)(x)`.
    pub fn v_at<F: Observable + ?Sized>(&self, f: &F, x: f64) -> f64 {
        self.branch_sum(&VBranch {
            f,
            x,
            theta: self.theta(),
        })
    }

    /// One Gauss-Kuzmin step `sum_{i >= m} [F(1/(i theta)) - F(1/(i theta + x))]`.
    pub fn cdf_step_at<F: Observable + ?Sized>(&self, cdf: &F, x: f64) -> f64 {
        self.branch_sum(&CdfBranch {
            cdf,
            x,
            theta: self.theta(),
        })
    }

    fn on_nodes<G: Fn(f64) -> f64 + Sync>(&self, g: G) -> GridFunction {
        let nodes = GridFunction::nodes_for(self.theta(), self.config.degree);
        // each node is summed sequentially, so the result does not depend on
        // the number of workers
        let values = nodes.par_iter().map(|&x| g(x)).collect();
        self.sample(|_| 0.0).with_values(values)
    }

    pub fn apply_u<F: Observable + ?Sized>(&self, f: &F) -> GridFunction {
        self.on_nodes(|x| self.u_at(f, x))
    }

    pub fn apply_v<F: Observable + ?Sized>(&self, f: &F) -> GridFunction {
        self.on_nodes(|x| self.v_at(f, x))
    }

    pub fn gk_step<F: Observable + ?Sized>(&self, cdf: &F) -> GridFunction {
        self.on_nodes(|x| self.cdf_step_at(cdf, x))
    }

    pub fn apply_u_power(&self, f: &GridFunction, n: usize) -> GridFunction {
        let mut g = f.clone();
        for _ in 0..n {
            g = self.apply_u(&g);
        }
        g
    }

    pub fn apply_v_power(&self, f: &GridFunction, n: usize) -> GridFunction {
        let mut g = f.clone();
        for _ in 0..n {
            g = self.apply_v(&g);
        }
        g
    }

    /// `V^n f = U^n((1 + theta x) f) / (1 + theta x)`.
    pub fn apply_v_power_via_u<F: Observable + ?Sized>(&self, f: &F, n: usize) -> GridFunction {
        let t = self.theta();
        let g = self.sample(|x| (1.0 + t * x) * f.value(x));
        self.apply_u_power(&g, n).map(|x, v| v / (1.0 + t * x))
    }

    fn check_density<H: Observable + ?Sized>(&self, h: &H) -> Result<()> {
        let nodes = GridFunction::nodes_for(self.theta(), self.config.degree);
        for x in nodes {
            let v = h.value(x);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidDensity(format!(
                    "density must be positive and finite, got {v} at x = {x}"
                )));
            }
        }
        Ok(())
    }

    /// `S^n f = U^n((1 + theta x) f h) / ((1 + theta x) h)` for the measure with
    /// density `h` (with respect to Lebesgue measure; normalization cancels).
    pub fn apply_s_power<F, H>(&self, f: &F, h: &H, n: usize) -> Result<GridFunction>
    where
        F: Observable + ?Sized,
        H: Observable + ?Sized,
    {
        self.check_density(h)?;
        let t = self.theta();
        let g = self.sample(|x| (1.0 + t * x) * f.value(x) * h.value(x));
        Ok(self
            .apply_u_power(&g, n)
            .map(|x, v| v / ((1.0 + t * x) * h.value(x))))
    }

    pub fn apply_s<F, H>(&self, f: &F, h: &H) -> Result<GridFunction>
    where
        F: Observable + ?Sized,
        H: Observable + ?Sized,
    {
        self.apply_s_power(f, h, 1)
    }

    /// `S f = V(f h) / h`, evaluated from the `V` series directly.
    pub fn apply_s_direct<F, H>(&self, f: &F, h: &H) -> Result<GridFunction>
    where
        F: Observable + ?Sized,
        H: Observable + ?Sized,
    {
        self.check_density(h)?;
        let fh = self.sample(|x| f.value(x) * h.value(x));
        Ok(self.apply_v(&fh).map(|x, v| v / h.value(x)))
    }
}

/// One interval of `[0, theta]` with chosen endpoint closure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    /// `(lo, hi]`, the shape of a rank-one cylinder.
    pub fn left_open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: false,
            hi_closed: true,
        }
    }
}

/// A finite union of disjoint intervals, sorted by position.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(mut parts: Vec<Interval>, params: &ThetaParams) -> Result<Self> {
        let t = params.theta();
        for p in &parts {
            if !(p.lo.is_finite() && p.hi.is_finite()) || p.lo < 0.0 || p.hi > t || p.lo > p.hi {
                return Err(Error::Interval(format!(
                    "[{}, {}] is not a subinterval of [0, {t}]",
                    p.lo, p.hi
                )));
            }
        }
        parts.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in parts.windows(2) {
            let touching = w[0].hi == w[1].lo && !(w[0].hi_closed && w[1].lo_closed);
            if w[0].hi > w[1].lo || (w[0].hi == w[1].lo && !touching) {
                return Err(Error::Interval(format!(
                    "intervals overlap near {}",
                    w[1].lo
                )));
            }
        }
        Ok(Self { parts })
    }

    pub fn full(params: &ThetaParams) -> Self {
        Self {
            parts: vec![Interval::closed(0.0, params.theta())],
        }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }
}

/// Index bound `(1/e - x)/theta` for an interval endpoint `e`; values within
/// a few ulps of an integer are snapped so that endpoint membership follows
/// the interval's closure.
fn branch_bound(e: f64, x: f64, t: f64) -> (f64, bool) {
    let r = (1.0 / e - x) / t;
    let n = r.round();
    if (r - n).abs() <= 1e-10 * r.max(1.0) {
        (n, true)
    } else {
        (r, false)
    }
}

/// `Q(x, A) = sum of P_i(x) over branches with u_i(x) in A`, using the
/// telescoped partial sums `sum_{i=a}^{b} P_i = ((theta x + 1)/theta)(u_a - u_{b+1})`.
pub fn markov_transition(x: f64, a: &IntervalSet, params: &ThetaParams) -> Result<f64> {
    let x = params.check_point(x)?;
    let t = params.theta();
    let m = params.m() as f64;
    let scale = (t * x + 1.0) / t;
    let u = |i: f64| 1.0 / (i * t + x);
    let mut total = 0.0;
    for p in a.parts() {
        // u_i in [lo, hi]  <=>  (1/hi - x)/theta <= i <= (1/lo - x)/theta
        let first = if p.hi == 0.0 {
            continue;
        } else {
            let (r, exact) = branch_bound(p.hi, x, t);
            if exact && !p.hi_closed {
                r + 1.0
            } else {
                r.ceil()
            }
        }
        .max(m);
        let last = if p.lo == 0.0 {
            f64::INFINITY
        } else {
            let (r, exact) = branch_bound(p.lo, x, t);
            if exact && !p.lo_closed {
                r - 1.0
            } else {
                r.floor()
            }
        };
        if last < first {
            continue;
        }
        let upper = if last.is_infinite() { 0.0 } else { u(last + 1.0) };
        total += scale * (u(first) - upper);
    }
    Ok(total)
}

/// Partition sum `sum |f(x_{k+1}) - f(x_k)|` over `points + 1` equispaced
/// points: a lower bound for the variation that is exact for monotone `f`.
pub fn variation<F: Fn(f64) -> f64>(f: F, theta: f64, points: usize) -> f64 {
    let xs = dense_grid(theta, points.max(1));
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    vals.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Variation of a grid function over a grid 16 times finer than its nodes.
pub fn grid_variation(g: &GridFunction) -> f64 {
    variation(|x| g.eval(x), g.theta(), 16 * g.degree())
}

/// `s(f) = max |f'|` of the spectral derivative: the best of the nodes and
/// the dense grid, then refined by golden-section search around the best
/// dense-grid point.
pub fn lipschitz_seminorm(g: &GridFunction) -> f64 {
    let d = g.derivative();
    let at_nodes = d.values().iter().map(|v| v.abs()).fold(0.0, f64::max);
    let xs = d.dense_points();
    let (j, at_dense) = xs
        .iter()
        .map(|&x| d.eval(x).abs())
        .enumerate()
        .fold((0, 0.0), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let lo = xs[j.saturating_sub(1)];
    let hi = xs[(j + 1).min(xs.len() - 1)];
    let refined = golden_max(|x| d.eval(x).abs(), lo, hi);
    at_nodes.max(at_dense).max(refined)
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    const R: f64 = 0.618_033_988_749_894_8;
    let mut c = b - R * (b - a);
    let mut e = a + R * (b - a);
    let (mut fc, mut fe) = (f(c), f(e));
    for _ in 0..60 {
        if fc > fe {
            b = e;
            e = c;
            fe = fc;
            c = b - R * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + R * (b - a);
            fe = f(e);
        }
    }
    fc.max(fe)
}

/// `mu(T^{-n}[a, b])` for the probability measure `mu` with density `h`
/// relative to normalized Lebesgue measure on `[0, theta]`, computed as
/// `int_a^b U^n f d gamma` with `f = log(1+theta^2)(1 + theta x) h / theta^2`.
pub fn pullback_measure<H: Observable + ?Sized>(
    op: &TransferOperator,
    a: f64,
    b: f64,
    n: usize,
    h: &H,
) -> Result<f64> {
    let params = *op.params();
    let a = params.check_point(a)?;
    let b = params.check_point(b)?;
    if a > b {
        return Err(Error::Interval(format!("[{a}, {b}] is empty")));
    }
    let t = params.theta();
    let l = params.log_normalizer();
    for x in dense_grid(t, 4 * op.config().degree) {
        if !(h.value(x) >= 0.0) {
            return Err(Error::InvalidDensity(format!("negative at x = {x}")));
        }
    }
    let mass = adaptive_gk15(|x| h.value(x) / t, 0.0, t, 1e-12)?.value;
    if (mass - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidDensity(format!("total mass {mass} is not 1")));
    }
    let f = op.sample(|x| l * (1.0 + t * x) * h.value(x) / (t * t));
    let g = op.apply_u_power(&f, n);
    let gamma = GammaTheta::new(params);
    let e = adaptive_gk15(
        |x| g.eval(x) * t / ((1.0 + t * x) * gamma.normalizer()),
        a,
        b,
        1e-13,
    )?;
    Ok(e.value)
}
