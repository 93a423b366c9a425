//! Exact arithmetic in the real quadratic field Q(theta), `theta = 1/sqrt(m)`.
//!
//! Elements are stored as `(a + b*theta)/d` with integers `a, b, d`, `d > 0`
//! and `gcd(a, b, d) = 1`. Products reduce `theta^2` to `1/m`, so the
//! representation is canonical and structural equality coincides with
//! equality of real values.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QThetaNumber {
    a: BigInt,
    b: BigInt,
    d: BigInt,
    m: u64,
}

impl QThetaNumber {
    /// `a + b theta`.
    pub fn new(a: BigRational, b: BigRational, m: u64) -> Self {
        let d = a.denom().lcm(b.denom());
        let ai = a.numer() * (&d / a.denom());
        let bi = b.numer() * (&d / b.denom());
        Self::reduced(ai, bi, d, m)
    }

    fn reduced(mut a: BigInt, mut b: BigInt, mut d: BigInt, m: u64) -> Self {
        debug_assert!(!d.is_zero());
        if a.is_zero() && b.is_zero() {
            return Self {
                a,
                b,
                d: BigInt::one(),
                m,
            };
        }
        if d.is_negative() {
            a = -a;
            b = -b;
            d = -d;
        }
        let g = a.gcd(&b).gcd(&d);
        if !g.is_one() {
            a /= &g;
            b /= &g;
            d /= &g;
        }
        Self { a, b, d, m }
    }

    pub fn zero(m: u64) -> Self {
        Self::reduced(BigInt::zero(), BigInt::zero(), BigInt::one(), m)
    }

    pub fn one(m: u64) -> Self {
        Self::from_integer(1, m)
    }

    pub fn theta(m: u64) -> Self {
        Self::reduced(BigInt::zero(), BigInt::one(), BigInt::one(), m)
    }

    pub fn from_integer(n: i64, m: u64) -> Self {
        Self::reduced(BigInt::from(n), BigInt::zero(), BigInt::one(), m)
    }

    pub fn from_rational(a: BigRational, m: u64) -> Self {
        Self::reduced(a.numer().clone(), BigInt::zero(), a.denom().clone(), m)
    }

    /// `p/q` as a field element. Panics if `q == 0`.
    pub fn from_ratio(p: i64, q: i64, m: u64) -> Self {
        assert!(q != 0, "zero denominator");
        Self::reduced(BigInt::from(p), BigInt::zero(), BigInt::from(q), m)
    }

    /// `k * theta`.
    pub fn theta_multiple(k: u64, m: u64) -> Self {
        Self::reduced(BigInt::zero(), BigInt::from(k), BigInt::one(), m)
    }

    pub fn rational_part(&self) -> BigRational {
        BigRational::new(self.a.clone(), self.d.clone())
    }

    pub fn theta_part(&self) -> BigRational {
        BigRational::new(self.b.clone(), self.d.clone())
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    fn m_int(&self) -> BigInt {
        BigInt::from(self.m)
    }

    /// Field norm `a^2 - b^2/m`, the product with the conjugate.
    pub fn norm(&self) -> BigRational {
        let m = self.m_int();
        BigRational::new(&m * &self.a * &self.a - &self.b * &self.b, m * &self.d * &self.d)
    }

    /// `a - b*theta`.
    pub fn conjugate(&self) -> Self {
        Self {
            a: self.a.clone(),
            b: -self.b.clone(),
            d: self.d.clone(),
            m: self.m,
        }
    }

    /// `1/(a + b theta) = (a - b theta)/(a^2 - b^2/m)`; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // m a^2 - b^2 vanishes only at zero because sqrt(m) is irrational
        let m = self.m_int();
        let den = &m * &self.a * &self.a - &self.b * &self.b;
        let dm = &self.d * &m;
        Some(Self::reduced(&dm * &self.a, -(dm * &self.b), den, self.m))
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        self.assert_same_field(rhs);
        if rhs.is_zero() {
            return None;
        }
        let m = self.m_int();
        let (a1, b1, a2, b2) = (&self.a, &self.b, &rhs.a, &rhs.b);
        let a = &rhs.d * (&m * a1 * a2 - b1 * b2);
        let b = &rhs.d * &m * (b1 * a2 - a1 * b2);
        let d = &self.d * (&m * a2 * a2 - b2 * b2);
        Some(Self::reduced(a, b, d, self.m))
    }

    pub fn mul_rational(&self, r: &BigRational) -> Self {
        Self::reduced(&self.a * r.numer(), &self.b * r.numer(), &self.d * r.denom(), self.m)
    }

    /// Exact sign of the real value, via `m a^2` versus `b^2` when the two
    /// parts disagree.
    pub fn signum(&self) -> Ordering {
        sign_of(&self.a, &self.b, self.m)
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    /// Largest integer not exceeding the value, using only integer square
    /// roots and exact comparisons.
    pub fn floor(&self) -> BigInt {
        // floor(|b| theta) = isqrt(floor(b^2/m))
        let s = (&self.b * &self.b / self.m_int()).sqrt();
        let approx = if self.b.is_negative() {
            &self.a - s - 1
        } else {
            &self.a + s
        };
        let mut g = approx.div_floor(&self.d);
        while self.cmp_integer(&g) == Ordering::Less {
            g -= 1;
        }
        loop {
            let next = &g + 1;
            if self.cmp_integer(&next) == Ordering::Less {
                break;
            }
            g = next;
        }
        g
    }

    fn cmp_integer(&self, k: &BigInt) -> Ordering {
        sign_of(&(&self.a - k * &self.d), &self.b, self.m)
    }

    /// Natural log of `|value|`, accurate even when the coefficients are huge
    /// and nearly cancel. Returns `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let same_sign = self.a.is_zero()
            || self.b.is_zero()
            || self.a.is_positive() == self.b.is_positive();
        let numer = if same_sign {
            ln_abs_same_sign(&self.a, &self.b, self.m)
        } else {
            // a + b theta = (m a^2 - b^2) / (m (a - b theta)), no cancellation below
            let m = self.m_int();
            ln_abs_bigint(&(&m * &self.a * &self.a - &self.b * &self.b))
                - (self.m as f64).ln()
                - ln_abs_same_sign(&self.a, &(-self.b.clone()), self.m)
        };
        numer - ln_abs_bigint(&self.d)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let direct_ok = self.a.is_zero()
            || self.b.is_zero()
            || self.a.is_positive() == self.b.is_positive();
        if direct_ok {
            let theta = (self.m as f64).sqrt().recip();
            let v = ratio_to_f64(&self.rational_part()) + ratio_to_f64(&self.theta_part()) * theta;
            if v.is_finite() && v != 0.0 {
                return v;
            }
        }
        let s = match self.signum() {
            Ordering::Less => -1.0,
            _ => 1.0,
        };
        s * self.ln_abs().exp()
    }

    fn assert_same_field(&self, rhs: &Self) {
        assert_eq!(
            self.m, rhs.m,
            "arithmetic between Q(theta) elements with different m"
        );
    }
}

// sign of a + b theta
fn sign_of(a: &BigInt, b: &BigInt, m: u64) -> Ordering {
    let sa = a.sign();
    let sb = b.sign();
    match (sa, sb) {
        (Sign::NoSign, s) | (s, Sign::NoSign) => sign_to_ordering(s),
        (x, y) if x == y => sign_to_ordering(x),
        _ => {
            let a2 = BigInt::from(m) * a * a;
            let b2 = b * b;
            if a2 > b2 {
                sign_to_ordering(sa)
            } else {
                sign_to_ordering(sb)
            }
        }
    }
}

fn sign_to_ordering(s: Sign) -> Ordering {
    match s {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub(crate) fn ln_abs_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    let shift = bits.saturating_sub(960);
    let top = (n.abs() >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

// ln|a + b theta| for integers a, b of equal sign (or one of them zero)
fn ln_abs_same_sign(a: &BigInt, b: &BigInt, m: u64) -> f64 {
    let ln_theta = -0.5 * (m as f64).ln();
    if b.is_zero() {
        return ln_abs_bigint(a);
    }
    if a.is_zero() {
        return ln_abs_bigint(b) + ln_theta;
    }
    let (big_is_a, big, small) = if a.abs() >= b.abs() { (true, a, b) } else { (false, b, a) };
    let ratio = ratio_to_f64(&BigRational::new(small.abs(), big.abs()));
    if big_is_a {
        // |a| (1 + |b/a| theta)
        ln_abs_bigint(big) + (ratio * ln_theta.exp()).ln_1p()
    } else {
        // |b| theta (1 + |a/b| / theta)
        ln_abs_bigint(big) + ln_theta + (ratio * (m as f64).sqrt()).ln_1p()
    }
}

impl PartialOrd for QThetaNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QThetaNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        self.assert_same_field(other);
        if self.d == other.d {
            return sign_of(&(&self.a - &other.a), &(&self.b - &other.b), self.m);
        }
        // denominators are positive
        sign_of(
            &(&self.a * &other.d - &other.a * &self.d),
            &(&self.b * &other.d - &other.b * &self.d),
            self.m,
        )
    }
}

impl<'a> Add<&'a QThetaNumber> for &'a QThetaNumber {
    type Output = QThetaNumber;
    fn add(self, rhs: &QThetaNumber) -> QThetaNumber {
        self.assert_same_field(rhs);
        if self.d == rhs.d {
            return QThetaNumber::reduced(&self.a + &rhs.a, &self.b + &rhs.b, self.d.clone(), self.m);
        }
        QThetaNumber::reduced(
            &self.a * &rhs.d + &rhs.a * &self.d,
            &self.b * &rhs.d + &rhs.b * &self.d,
            &self.d * &rhs.d,
            self.m,
        )
    }
}

impl<'a> Sub<&'a QThetaNumber> for &'a QThetaNumber {
    type Output = QThetaNumber;
    fn sub(self, rhs: &QThetaNumber) -> QThetaNumber {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a QThetaNumber> for &'a QThetaNumber {
    type Output = QThetaNumber;
    fn mul(self, rhs: &QThetaNumber) -> QThetaNumber {
        self.assert_same_field(rhs);
        let m = self.m_int();
        let (a1, b1, a2, b2) = (&self.a, &self.b, &rhs.a, &rhs.b);
        if b1.is_zero() && b2.is_zero() {
            return QThetaNumber::reduced(a1 * a2, BigInt::zero(), &self.d * &rhs.d, self.m);
        }
        QThetaNumber::reduced(
            &m * a1 * a2 + b1 * b2,
            &m * (a1 * b2 + b1 * a2),
            m * &self.d * &rhs.d,
            self.m,
        )
    }
}

impl Neg for &QThetaNumber {
    type Output = QThetaNumber;
    fn neg(self) -> QThetaNumber {
        QThetaNumber {
            a: -self.a.clone(),
            b: -self.b.clone(),
            d: self.d.clone(),
            m: self.m,
        }
    }
}

impl Neg for QThetaNumber {
    type Output = QThetaNumber;
    fn neg(self) -> QThetaNumber {
        QThetaNumber {
            a: -self.a,
            b: -self.b,
            d: self.d,
            m: self.m,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<QThetaNumber> for QThetaNumber {
            type Output = QThetaNumber;
            fn $method(self, rhs: QThetaNumber) -> QThetaNumber {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a QThetaNumber> for QThetaNumber {
            type Output = QThetaNumber;
            fn $method(self, rhs: &QThetaNumber) -> QThetaNumber {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<QThetaNumber> for &'a QThetaNumber {
            type Output = QThetaNumber;
            fn $method(self, rhs: QThetaNumber) -> QThetaNumber {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for QThetaNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = (self.rational_part(), self.theta_part());
        match (a.is_zero(), b.is_zero()) {
            (_, true) => write!(f, "{a}"),
            (true, false) => write!(f, "({b})θ"),
            (false, false) => write!(f, "{a} + ({b})θ"),
        }
    }
}

/// Serialized as `{"a": "p/q", "b": "p/q"}` with decimal-string rationals.
impl Serialize for QThetaNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("QThetaNumber", 2)?;
        s.serialize_field("a", &rational_string(&self.rational_part()))?;
        s.serialize_field("b", &rational_string(&self.theta_part()))?;
        s.end()
    }
}

pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q`, or a finite decimal such as `-0.125` or `3e-2` into an
/// exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let scale = exponent - frac_part.len() as i32 - 1;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(digits);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if negative { -r } else { r })
}

/// Closest rational with denominator at most `max_den` (best approximation
/// from the regular continued fraction of `x`).
pub fn limit_denominator(x: &BigRational, max_den: &BigInt) -> BigRational {
    if x.denom() <= max_den {
        return x.clone();
    }
    let (mut p0, mut q0, mut p1, mut q1) = (
        BigInt::zero(),
        BigInt::one(),
        BigInt::one(),
        BigInt::zero(),
    );
    let mut n = x.numer().clone();
    let mut d = x.denom().clone();
    loop {
        let (a, r) = n.div_mod_floor(&d);
        let q2 = &q0 + &a * &q1;
        if &q2 > max_den {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        if r.is_zero() {
            break;
        }
        n = std::mem::replace(&mut d, r);
    }
    let k = (max_den - &q0) / &q1;
    let bound1 = BigRational::new(&p0 + &k * &p1, &q0 + &k * &q1);
    let bound2 = BigRational::new(p1, q1);
    if (&bound2 - x).abs() <= (&bound1 - x).abs() {
        bound2
    } else {
        bound1
    }
}
