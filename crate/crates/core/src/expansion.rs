//! The theta-expansion map `T(x) = 1/x - theta*floor(1/(x theta))` on
//! `[0, theta]`, digit extraction, convergents and cylinder sets.
//!
//! Every operation exists for two backends: exact arithmetic in Q(theta) and
//! hardware floats. Only the exact backend certifies digits; float digits are
//! trusted for at most [`FLOAT_RELIABLE_DIGITS`] steps because each step
//! amplifies relative error by roughly `1/x^2`.

use std::cmp::Ordering;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ThetaParams;
use crate::qtheta::QThetaNumber;

/// Float digits past this index are not trusted for identity checks.
pub const FLOAT_RELIABLE_DIGITS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

/// A point of `[0, theta]` the expansion map can act on.
pub trait OrbitPoint: Clone + Send + Sync {
    const BACKEND: Backend;

    /// Validates the point against `[0, theta]`, possibly normalizing it.
    fn checked(&self, params: &ThetaParams) -> Result<Self>;

    fn is_zero(&self) -> bool;

    /// `floor(1/(x theta))`, or `None` (the infinite digit) at `x = 0`.
    /// The caller guarantees `x` is in range.
    fn digit_unchecked(&self, params: &ThetaParams) -> Result<Option<u64>>;

    /// One application of the map, given the digit of this point.
    fn step(&self, digit: u64, params: &ThetaParams) -> Self;

    fn to_f64(&self) -> f64;
}

impl OrbitPoint for QThetaNumber {
    const BACKEND: Backend = Backend::Exact;

    fn checked(&self, params: &ThetaParams) -> Result<Self> {
        if self.m() != params.m() {
            return Err(Error::FieldMismatch(self.m(), params.m()));
        }
        if self.signum() == Ordering::Less || *self > params.theta_exact() {
            return Err(Error::Domain {
                value: self.to_f64(),
                theta: params.theta(),
            });
        }
        Ok(self.clone())
    }

    fn is_zero(&self) -> bool {
        QThetaNumber::is_zero(self)
    }

    fn digit_unchecked(&self, params: &ThetaParams) -> Result<Option<u64>> {
        if QThetaNumber::is_zero(self) {
            return Ok(None);
        }
        let scaled = self * &params.theta_exact();
        let r = scaled.recip().expect("nonzero");
        r.floor().to_u64().map(Some).ok_or(Error::DigitOverflow)
    }

    fn step(&self, digit: u64, params: &ThetaParams) -> Self {
        if QThetaNumber::is_zero(self) {
            return self.clone();
        }
        let inv = self.recip().expect("nonzero");
        inv - QThetaNumber::theta_multiple(digit, params.m())
    }

    fn to_f64(&self) -> f64 {
        QThetaNumber::to_f64(self)
    }
}

impl OrbitPoint for f64 {
    const BACKEND: Backend = Backend::Float;

    fn checked(&self, params: &ThetaParams) -> Result<Self> {
        params.check_point(*self)
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn digit_unchecked(&self, params: &ThetaParams) -> Result<Option<u64>> {
        if *self == 0.0 {
            return Ok(None);
        }
        let r = (self * params.theta()).recip().floor();
        if r >= u64::MAX as f64 {
            return Err(Error::DigitOverflow);
        }
        // rounding can only push the quotient below m right at x = theta
        Ok(Some((r as u64).max(params.m())))
    }

    fn step(&self, digit: u64, params: &ThetaParams) -> Self {
        if *self == 0.0 {
            return 0.0;
        }
        // T(x) = theta * (1/(x theta) - a), which stays inside [0, theta)
        let r = (self * params.theta()).recip();
        (params.theta() * (r - digit as f64)).clamp(0.0, params.theta())
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

/// `floor(1/(x theta))`; `None` stands for the infinite digit at `x = 0`.
pub fn digit_index<P: OrbitPoint>(x: &P, params: &ThetaParams) -> Result<Option<u64>> {
    x.checked(params)?.digit_unchecked(params)
}

/// The map `T_theta`, with `T(0) = 0`.
pub fn gauss_map_apply<P: OrbitPoint>(x: &P, params: &ThetaParams) -> Result<P> {
    let x = x.checked(params)?;
    match x.digit_unchecked(params)? {
        None => Ok(x),
        Some(a) => Ok(x.step(a, params)),
    }
}

/// Digits `a_1, a_2, ...` of an expansion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DigitSequence {
    pub digits: Vec<u64>,
    /// The orbit reached 0, so the expansion is finite.
    pub terminated: bool,
    /// Leading digits that can be trusted (all of them for the exact backend).
    pub reliable: usize,
}

impl DigitSequence {
    /// A certified digit string, e.g. a cylinder label.
    pub fn from_digits(digits: Vec<u64>, params: &ThetaParams) -> Result<Self> {
        validate_digits(&digits, params)?;
        let reliable = digits.len();
        Ok(Self {
            digits,
            terminated: false,
            reliable,
        })
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn precision_exhausted(&self) -> bool {
        self.reliable < self.digits.len()
    }
}

/// Digits together with the iterates `T^0 x, ..., T^len x`.
#[derive(Clone, Debug)]
pub struct Orbit<P> {
    pub digits: DigitSequence,
    pub points: Vec<P>,
}

/// Runs the map for up to `n_max` steps from `x in (0, theta]`.
pub fn orbit<P: OrbitPoint>(x: &P, n_max: usize, params: &ThetaParams) -> Result<Orbit<P>> {
    let x = x.checked(params)?;
    if x.is_zero() {
        return Err(Error::Domain {
            value: 0.0,
            theta: params.theta(),
        });
    }
    if n_max == 0 {
        return Err(Error::NonPositive { what: "n_max" });
    }
    let mut digits = Vec::with_capacity(n_max);
    let mut points = Vec::with_capacity(n_max + 1);
    let mut terminated = false;
    let mut current = x;
    while digits.len() < n_max {
        let a = current
            .digit_unchecked(params)?
            .expect("nonzero points have finite digits");
        digits.push(a);
        let next = current.step(a, params);
        points.push(std::mem::replace(&mut current, next));
        if current.is_zero() {
            terminated = true;
            break;
        }
    }
    points.push(current);
    let reliable = match P::BACKEND {
        Backend::Exact => digits.len(),
        Backend::Float => digits.len().min(FLOAT_RELIABLE_DIGITS),
    };
    Ok(Orbit {
        digits: DigitSequence {
            digits,
            terminated,
            reliable,
        },
        points,
    })
}

/// The first `min(n_max, termination)` digits of `x`.
pub fn expand<P: OrbitPoint>(x: &P, n_max: usize, params: &ThetaParams) -> Result<DigitSequence> {
    orbit(x, n_max, params).map(|o| o.digits)
}

fn validate_digits(digits: &[u64], params: &ThetaParams) -> Result<()> {
    if digits.is_empty() {
        return Err(Error::EmptyDigits);
    }
    for (i, &d) in digits.iter().enumerate() {
        params.check_digit(d, i + 1)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergentPair {
    pub n: usize,
    pub p: QThetaNumber,
    pub q: QThetaNumber,
}

/// Exact convergents `p_n/q_n` for `n = 0..=len`, with `p_0 = 0`, `q_0 = 1`.
#[derive(Clone, Debug)]
pub struct Convergents {
    m: u64,
    pairs: Vec<ConvergentPair>,
}

impl Convergents {
    pub fn new(digits: &[u64], params: &ThetaParams) -> Result<Self> {
        validate_digits(digits, params)?;
        let m = params.m();
        let mut pairs = Vec::with_capacity(digits.len() + 1);
        let (mut p_prev, mut q_prev) = (QThetaNumber::one(m), QThetaNumber::zero(m));
        let (mut p, mut q) = (QThetaNumber::zero(m), QThetaNumber::one(m));
        pairs.push(ConvergentPair {
            n: 0,
            p: p.clone(),
            q: q.clone(),
        });
        for (i, &a) in digits.iter().enumerate() {
            let step = QThetaNumber::theta_multiple(a, m);
            let p_next = &(&step * &p) + &p_prev;
            let q_next = &(&step * &q) + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            pairs.push(ConvergentPair {
                n: i + 1,
                p: p.clone(),
                q: q.clone(),
            });
        }
        Ok(Self { m, pairs })
    }

    /// Number of digits the convergents were built from.
    pub fn len(&self) -> usize {
        self.pairs.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The pair of index `n`, `0 <= n <= len`.
    pub fn pair(&self, n: usize) -> &ConvergentPair {
        &self.pairs[n]
    }

    /// Pairs `n = 1..=len`.
    pub fn iter(&self) -> impl Iterator<Item = &ConvergentPair> {
        self.pairs[1..].iter()
    }

    fn prev(&self, n: usize) -> (QThetaNumber, QThetaNumber) {
        if n == 0 {
            (QThetaNumber::one(self.m), QThetaNumber::zero(self.m))
        } else {
            (self.pairs[n - 1].p.clone(), self.pairs[n - 1].q.clone())
        }
    }

    /// `p_n q_{n-1} - p_{n-1} q_n`, which equals `(-1)^(n+1)`.
    pub fn determinant(&self, n: usize) -> QThetaNumber {
        let (pp, qp) = self.prev(n);
        let c = &self.pairs[n];
        &(&c.p * &qp) - &(&pp * &c.q)
    }

    /// `(p_n + t p_{n-1}) / (q_n + t q_{n-1})` for a tail `t` in `[0, theta]`.
    pub fn evaluate(&self, n: usize, tail: &QThetaNumber) -> QThetaNumber {
        let (pp, qp) = self.prev(n);
        let c = &self.pairs[n];
        let num = &c.p + &(tail * &pp);
        let den = &c.q + &(tail * &qp);
        num.checked_div(&den).expect("convergent denominators are positive")
    }

    /// `1/(q_n (q_n + theta q_{n-1}))`, the normalized length of the rank-n
    /// cylinder.
    pub fn cylinder_measure(&self, n: usize) -> QThetaNumber {
        let (_, qp) = self.prev(n);
        let q = &self.pairs[n].q;
        let theta = QThetaNumber::theta(self.m);
        (q * &(q + &(&theta * &qp)))
            .recip()
            .expect("positive denominators")
    }

    /// Cylinder of the first `n` digits.
    pub fn cylinder(&self, digits: &[u64], n: usize) -> Cylinder {
        let at_zero = self.evaluate(n, &QThetaNumber::zero(self.m));
        let at_theta = self.evaluate(n, &QThetaNumber::theta(self.m));
        let (lower, upper, closed) = if at_zero < at_theta {
            (at_zero, at_theta, ClosedEnd::Lower)
        } else {
            (at_theta, at_zero, ClosedEnd::Upper)
        };
        Cylinder {
            digits: digits[..n].to_vec(),
            lower,
            upper,
            closed,
        }
    }
}

pub fn convergents(digits: &DigitSequence, params: &ThetaParams) -> Result<Convergents> {
    Convergents::new(&digits.digits, params)
}

/// Evaluates the finite continued fraction with the given digits and tail
/// `t = T^n(x)` (default 0).
pub fn reconstruct(
    digits: &[u64],
    tail: Option<&QThetaNumber>,
    params: &ThetaParams,
) -> Result<QThetaNumber> {
    let conv = Convergents::new(digits, params)?;
    let zero = QThetaNumber::zero(params.m());
    let tail = match tail {
        Some(t) => t.checked(params)?,
        None => zero,
    };
    Ok(conv.evaluate(digits.len(), &tail))
}

/// Float version of [`reconstruct`], evaluated from the innermost level out.
pub fn reconstruct_f64(digits: &[u64], tail: Option<f64>, params: &ThetaParams) -> Result<f64> {
    validate_digits(digits, params)?;
    let mut t = params.check_point(tail.unwrap_or(0.0))?;
    for &a in digits.iter().rev() {
        t = 1.0 / (a as f64 * params.theta() + t);
    }
    Ok(t)
}

/// `x - p_n/q_n` computed directly and through the remainder identity
/// `(-1)^n T^n(x) / (q_n (q_n + T^n(x) q_{n-1}))`.
///
/// The sign follows from the determinant `p_n q_{n-1} - p_{n-1} q_n =
/// (-1)^(n+1)`: odd convergents overshoot `x`.
#[derive(Clone, Debug, Serialize)]
pub struct ApproximationError {
    pub n: usize,
    pub direct: QThetaNumber,
    pub via_tail: QThetaNumber,
}

impl ApproximationError {
    pub fn holds(&self) -> bool {
        self.direct == self.via_tail
    }
}

pub fn approximation_error(
    x: &QThetaNumber,
    n: usize,
    params: &ThetaParams,
) -> Result<ApproximationError> {
    let orbit = orbit(x, n, params)?;
    if orbit.digits.len() < n {
        return Err(Error::Terminated {
            at: orbit.digits.len(),
            requested: n,
        });
    }
    let conv = Convergents::new(&orbit.digits.digits, params)?;
    Ok(approximation_error_from(x, &conv, &orbit.points[n], n))
}

pub(crate) fn approximation_error_from(
    x: &QThetaNumber,
    conv: &Convergents,
    tail: &QThetaNumber,
    n: usize,
) -> ApproximationError {
    let c = conv.pair(n);
    let qp = &conv.prev(n).1;
    let direct = x - &c.p.checked_div(&c.q).expect("q_n > 0");
    let sign = if n % 2 == 1 { -1 } else { 1 };
    let num = tail * &QThetaNumber::from_integer(sign, x.m());
    let den = &c.q * &(&c.q + &(tail * qp));
    let via_tail = num.checked_div(&den).expect("positive denominator");
    ApproximationError {
        n,
        direct,
        via_tail,
    }
}

/// `(1/(q_n (q_{n+1} + theta q_n)), 1/(q_n q_{n+1}))`, which bracket
/// `|x - p_n/q_n|`. Needs `n + 1 <= conv.len()`.
pub fn approximation_bounds(conv: &Convergents, n: usize) -> (QThetaNumber, QThetaNumber) {
    let q = &conv.pair(n).q;
    let q_next = &conv.pair(n + 1).q;
    let theta = QThetaNumber::theta(q.m());
    let lower = (q * &(q_next + &(&theta * q))).recip().expect("positive");
    let upper = (q * q_next).recip().expect("positive");
    (lower, upper)
}

/// Outcome of [`identity_check`]: the first index where each identity failed,
/// or `None` if it held at every rank.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub ranks: usize,
    pub determinant: Option<usize>,
    pub reconstruction: Option<usize>,
    pub error_identity: Option<usize>,
    pub cylinder_measure: Option<usize>,
    pub cylinder_sandwich: Option<usize>,
    pub error_bounds: Option<usize>,
}

impl IdentityCheck {
    pub fn all_hold(&self) -> bool {
        [
            self.determinant,
            self.reconstruction,
            self.error_identity,
            self.cylinder_measure,
            self.cylinder_sandwich,
            self.error_bounds,
        ]
        .iter()
        .all(Option::is_none)
    }
}

/// Checks, with exact comparisons at every rank `n <= n_max` of the orbit of
/// `x`: the determinant, reconstruction from `T^n x`, the two-sided error
/// formula, the cylinder measure `1/(q_n (q_n + theta q_{n-1}))` against the
/// endpoint difference, the sandwich `1/((1+theta) q_n^2) < measure < 1/q_n^2`
/// and the error bracket (for ranks followed by another digit).
pub fn identity_check(x: &QThetaNumber, n_max: usize, params: &ThetaParams) -> Result<IdentityCheck> {
    let orb = orbit(x, n_max + 1, params)?;
    let digits = &orb.digits.digits;
    let conv = Convergents::new(digits, params)?;
    let m = params.m();
    let one = QThetaNumber::one(m);
    let one_plus_theta = &one + &params.theta_exact();
    let ranks = digits.len().min(n_max);
    let mut out = IdentityCheck {
        ranks,
        ..Default::default()
    };
    let fail = |slot: &mut Option<usize>, ok: bool, n: usize| {
        if !ok && slot.is_none() {
            *slot = Some(n);
        }
    };
    for n in 1..=ranks {
        let sign = if n % 2 == 1 { one.clone() } else { -&one };
        fail(&mut out.determinant, conv.determinant(n) == sign, n);
        fail(&mut out.reconstruction, conv.evaluate(n, &orb.points[n]) == *x, n);
        let err = approximation_error_from(x, &conv, &orb.points[n], n);
        fail(&mut out.error_identity, err.holds(), n);
        let measure = conv.cylinder(digits, n).normalized_measure();
        fail(&mut out.cylinder_measure, measure == conv.cylinder_measure(n), n);
        let qn2 = &conv.pair(n).q * &conv.pair(n).q;
        let lower = (&one_plus_theta * &qn2).recip().expect("q_n > 0");
        let upper = qn2.recip().expect("q_n > 0");
        fail(&mut out.cylinder_sandwich, lower < measure && measure < upper, n);
        if n < digits.len() {
            let (lo, hi) = approximation_bounds(&conv, n);
            let e = err.direct.abs();
            fail(&mut out.error_bounds, lo <= e && e <= hi, n);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosedEnd {
    Lower,
    Upper,
}

/// Fundamental interval of points sharing a digit prefix. It is closed at the
/// endpoint with tail 0 and open at the endpoint with tail theta, so the
/// cylinders of a fixed rank partition `(0, theta]`.
#[derive(Clone, Debug, Serialize)]
pub struct Cylinder {
    pub digits: Vec<u64>,
    pub lower: QThetaNumber,
    pub upper: QThetaNumber,
    pub closed: ClosedEnd,
}

impl Cylinder {
    /// Length divided by theta (the probability under normalized Lebesgue
    /// measure on `[0, theta]`).
    pub fn normalized_measure(&self) -> QThetaNumber {
        let m = self.lower.m();
        // 1/theta = m theta
        &(&self.upper - &self.lower) * &QThetaNumber::theta_multiple(m, m)
    }

    pub fn contains(&self, x: &QThetaNumber) -> bool {
        match self.closed {
            ClosedEnd::Lower => *x >= self.lower && *x < self.upper,
            ClosedEnd::Upper => *x > self.lower && *x <= self.upper,
        }
    }
}

pub fn cylinder(digits: &[u64], params: &ThetaParams) -> Result<Cylinder> {
    let conv = Convergents::new(digits, params)?;
    Ok(conv.cylinder(digits, digits.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn p2() -> ThetaParams {
        ThetaParams::new(2).unwrap()
    }

    fn half(m: u64) -> QThetaNumber {
        QThetaNumber::from_ratio(1, 2, m)
    }

    fn one_over_a_theta(a: u64, m: u64) -> QThetaNumber {
        QThetaNumber::theta_multiple(a, m).recip().unwrap()
    }

    #[test]
    fn map_examples() {
        let p = p2();
        assert!(gauss_map_apply(&QThetaNumber::zero(2), &p).unwrap().is_zero());
        assert_eq!(gauss_map_apply(&0.0f64, &p).unwrap(), 0.0);
        assert!(gauss_map_apply(&one_over_a_theta(4, 2), &p).unwrap().is_zero());
        // T(1/2) = 2 - 2 theta
        let t = gauss_map_apply(&half(2), &p).unwrap();
        assert_eq!(t, QThetaNumber::new(BigRational::from_integer(2.into()), BigRational::from_integer((-2).into()), 2));
        assert!((t.to_f64() - 0.585786).abs() < 1e-6);
        let tf = gauss_map_apply(&0.5f64, &p).unwrap();
        assert!((tf - t.to_f64()).abs() < 1e-14);
    }

    #[test]
    fn digit_examples() {
        let p = p2();
        assert_eq!(digit_index(&p.theta_exact(), &p).unwrap(), Some(2));
        assert_eq!(digit_index(&p.theta(), &p).unwrap(), Some(2));
        assert_eq!(digit_index(&QThetaNumber::zero(2), &p).unwrap(), None);
        assert_eq!(digit_index(&half(2), &p).unwrap(), Some(2));
        for m in [3u64, 5, 10, 17] {
            let pm = ThetaParams::new(m).unwrap();
            assert_eq!(digit_index(&pm.theta_exact(), &pm).unwrap(), Some(m));
        }
    }

    #[test]
    fn domain_errors() {
        let p = p2();
        assert!(matches!(gauss_map_apply(&0.99f64, &p), Err(Error::Domain { .. })));
        assert!(matches!(digit_index(&-0.1f64, &p), Err(Error::Domain { .. })));
        let big = QThetaNumber::from_ratio(99, 100, 2);
        assert!(matches!(expand(&big, 3, &p), Err(Error::Domain { .. })));
        let other_field = QThetaNumber::from_ratio(1, 2, 3);
        assert!(matches!(expand(&other_field, 3, &p), Err(Error::FieldMismatch(3, 2))));
        assert!(matches!(expand(&half(2), 0, &p), Err(Error::NonPositive { .. })));
    }

    #[test]
    fn expand_examples() {
        let p = p2();
        let d = expand(&one_over_a_theta(4, 2), 10, &p).unwrap();
        assert_eq!(d.digits, vec![4]);
        assert!(d.terminated);
        let d = expand(&half(2), 3, &p).unwrap();
        assert_eq!(d.digits, vec![2, 2, 4]);
        assert!(!d.terminated);
        let d = expand(&p.theta_exact(), 5, &p).unwrap();
        assert_eq!(d.digits, vec![2]);
        assert!(d.terminated);
    }

    #[test]
    fn float_expansion_flags_reliability_horizon() {
        let p = ThetaParams::new(3).unwrap();
        let d = expand(&0.3f64, 100, &p).unwrap();
        assert_eq!(d.len(), 100);
        assert_eq!(d.reliable, FLOAT_RELIABLE_DIGITS);
        assert!(d.precision_exhausted());
        let short = expand(&0.3f64, 10, &p).unwrap();
        assert!(!short.precision_exhausted());
        // float and exact digits agree on a short prefix
        let exact = expand(&QThetaNumber::from_ratio(3, 10, 3), 10, &p).unwrap();
        assert_eq!(exact.digits[..], d.digits[..10]);
    }

    #[test]
    fn convergent_examples() {
        for m in [2u64, 3, 7] {
            let p = ThetaParams::new(m).unwrap();
            let c = Convergents::new(&[m], &p).unwrap();
            assert_eq!(c.pair(1).p, QThetaNumber::one(m));
            assert_eq!(c.pair(1).q, QThetaNumber::theta_multiple(m, m));
            let c = Convergents::new(&[m, m], &p).unwrap();
            assert_eq!(c.pair(2).p, QThetaNumber::theta_multiple(m, m));
            // q_2 = (m theta)^2 + 1 = m + 1
            assert_eq!(c.pair(2).q, QThetaNumber::from_integer(m as i64 + 1, m));
        }
        let err = Convergents::new(&[2, 1], &p2()).unwrap_err();
        assert_eq!(err, Error::DigitBelowMinimum { digit: 1, position: 2, m: 2 });
        assert_eq!(Convergents::new(&[], &p2()).unwrap_err(), Error::EmptyDigits);
    }

    #[test]
    fn reconstruct_examples() {
        let p = p2();
        assert_eq!(reconstruct(&[4], None, &p).unwrap(), one_over_a_theta(4, 2));
        let o = orbit(&half(2), 3, &p).unwrap();
        assert_eq!(o.digits.digits, vec![2, 2, 4]);
        assert_eq!(reconstruct(&[2, 2, 4], Some(&o.points[3]), &p).unwrap(), half(2));
        // tail theta on a one-digit prefix gives 1/(m theta + theta)
        let x = reconstruct(&[2], Some(&p.theta_exact()), &p).unwrap();
        assert_eq!(x, QThetaNumber::theta_multiple(3, 2).recip().unwrap());
        let xf = reconstruct_f64(&[2, 2, 4], Some(o.points[3].to_f64()), &p).unwrap();
        assert!((xf - 0.5).abs() < 1e-15);
    }

    #[test]
    fn approximation_error_examples() {
        let p = p2();
        let e = approximation_error(&half(2), 1, &p).unwrap();
        assert!(e.holds());
        // p_1/q_1 = 1/(2 theta) = theta > 1/2
        let direct = e.direct.to_f64();
        let expect = 0.5 - 1.0 / (2.0 * p.theta());
        assert!((direct - expect).abs() < 1e-15);
        assert!(direct < 0.0);
        let e2 = approximation_error(&half(2), 2, &p).unwrap();
        assert!(e2.holds() && e2.direct.signum() == Ordering::Greater);
        // terminated exactly at n gives zero error
        let x = one_over_a_theta(4, 2);
        let e = approximation_error(&x, 1, &p).unwrap();
        assert!(e.direct.is_zero() && e.holds());
        assert_eq!(
            approximation_error(&x, 2, &p).unwrap_err(),
            Error::Terminated { at: 1, requested: 2 }
        );
    }

    #[test]
    fn cylinder_examples() {
        let p = p2();
        let c = cylinder(&[2], &p).unwrap();
        assert_eq!(c.lower, QThetaNumber::theta_multiple(3, 2).recip().unwrap());
        assert_eq!(c.upper, p.theta_exact());
        assert_eq!(c.closed, ClosedEnd::Upper);
        assert_eq!(c.normalized_measure(), QThetaNumber::from_ratio(1, 3, 2));
        assert!(c.contains(&p.theta_exact()));
        assert!(!c.contains(&c.lower));
        let conv = Convergents::new(&[2], &p).unwrap();
        assert_eq!(conv.cylinder_measure(1), c.normalized_measure());
    }

    #[test]
    fn rank_one_cylinders_partition() {
        let p = ThetaParams::new(3).unwrap();
        let total: QThetaNumber = (3..40u64)
            .map(|k| cylinder(&[k], &p).unwrap().normalized_measure())
            .fold(QThetaNumber::zero(3), |acc, x| acc + x);
        // m/(k(k+1)) telescopes to m (1/m - 1/40)
        assert_eq!(total, QThetaNumber::from_ratio(37, 40, 3));
    }

    fn digit_strategy(m: u64) -> impl Strategy<Value = Vec<u64>> {
        prop::collection::vec(m..m + 40, 1..50)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn determinant_is_alternating_unit(digits in digit_strategy(3)) {
            let p = ThetaParams::new(3).unwrap();
            let c = Convergents::new(&digits, &p).unwrap();
            for n in 1..=c.len() {
                let sign = if n % 2 == 1 { 1 } else { -1 };
                prop_assert_eq!(c.determinant(n), QThetaNumber::from_integer(sign, 3));
                prop_assert!(c.pair(n).q > c.pair(n - 1).q);
            }
        }

        #[test]
        fn cylinder_contains_its_points(digits in digit_strategy(2), num in 1i64..1000) {
            let p = p2();
            let n = digits.len().min(12);
            let prefix = &digits[..n];
            let c = cylinder(prefix, &p).unwrap();
            // any tail in (0, theta) lands inside, and re-expands to the prefix
            let t = &p.theta_exact() * &QThetaNumber::from_ratio(num, 1001, 2);
            let x = reconstruct(prefix, Some(&t), &p).unwrap();
            prop_assert!(c.contains(&x));
            let d = expand(&x, n, &p).unwrap();
            prop_assert_eq!(&d.digits[..], prefix);
            // normalized length matches 1/(q_n (q_n + theta q_{n-1}))
            let conv = Convergents::new(prefix, &p).unwrap();
            prop_assert_eq!(c.normalized_measure(), conv.cylinder_measure(n));
        }

        #[test]
        fn float_map_stays_in_range(x in 1e-12f64..0.7071) {
            let p = p2();
            let d = digit_index(&x, &p).unwrap().unwrap();
            prop_assert!(d >= 2);
            let y = gauss_map_apply(&x, &p).unwrap();
            prop_assert!((0.0..=p.theta()).contains(&y));
        }
    }
}
