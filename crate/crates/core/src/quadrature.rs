//! One-dimensional quadrature: adaptive Gauss-Kronrod (7/15), tanh-sinh for
//! integrable endpoint singularities, and Gauss-Legendre rules.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// An integral value with its estimated absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Estimate {
        value: kronrod * h,
        error: ((kronrod - gauss) * h).abs(),
    }
}

/// Adaptive G7K15 on `[a, b]` bisecting the worst subinterval until the
/// summed error estimate drops below `tol`.
pub fn adaptive_gk15<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    const MAX_INTERVALS: usize = 2000;
    if tol <= 0.0 {
        return Err(Error::NonPositive { what: "tolerance" });
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let mut parts = vec![(a, b, gk15(&f, a, b))];
    loop {
        let error: f64 = parts.iter().map(|p| p.2.error).sum();
        if error <= tol || parts.len() >= MAX_INTERVALS {
            let value = parts.iter().map(|p| p.2.value).sum();
            if error > tol {
                return Err(Error::Quadrature {
                    estimate: error,
                    tolerance: tol,
                });
            }
            return Ok(Estimate { value, error });
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error.total_cmp(&y.1 .2.error))
            .map(|(i, _)| i)
            .expect("nonempty");
        let (lo, hi, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(&f, lo, mid)));
        parts.push((mid, hi, gk15(&f, mid, hi)));
    }
}

/// Tanh-sinh (double exponential) quadrature on `[a, b]`. Tolerates
/// integrable singularities at either endpoint because abscissae are
/// generated as offsets from the nearer endpoint and never touch it.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    const T_MAX: f64 = 4.0;
    const MAX_LEVEL: u32 = 12;
    if tol <= 0.0 {
        return Err(Error::NonPositive { what: "tolerance" });
    }
    let half = 0.5 * (b - a);
    // contribution of abscissa t and its mirror -t
    let pair = |t: f64| -> f64 {
        let s = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * s).exp();
        // 1 - tanh(s) = 2e/(1+e); weight = (pi/2) cosh t / cosh^2 s
        let offset = half * 2.0 * e / (1.0 + e);
        let cosh_s = 0.5 * (s.exp() + (-s).exp());
        let w = FRAC_PI_2 * t.cosh() / (cosh_s * cosh_s);
        if t == 0.0 {
            return w * f(a + half);
        }
        // abscissae that round onto an endpoint are dropped
        let mut acc = 0.0;
        let (xl, xr) = (a + offset, b - offset);
        if xl != a {
            acc += f(xl);
        }
        if xr != b {
            acc += f(xr);
        }
        w * acc
    };
    let mut h = 1.0;
    let mut sum = pair(0.0);
    let mut k = 1.0;
    while k * h <= T_MAX {
        sum += pair(k * h);
        k += 1.0;
    }
    let mut prev = sum * h * half;
    for _ in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut k = 1.0;
        while k * h <= T_MAX {
            sum += pair(k * h);
            k += 2.0;
        }
        let value = sum * h * half;
        let diff = (value - prev).abs();
        if diff <= tol && value.is_finite() {
            return Ok(Estimate { value, error: diff });
        }
        prev = value;
    }
    Err(Error::Quadrature {
        estimate: f64::NAN,
        tolerance: tol,
    })
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A Gauss-Legendre rule ready to integrate over arbitrary intervals.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(5);
        // degree 9 is the limit for 5 points
        let v = rule.integrate(|x| x.powi(9) + x.powi(8), 0.0, 1.0);
        assert!((v - (0.1 + 1.0 / 9.0)).abs() < 1e-15);
        let (x, w) = gauss_legendre(64);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        let (x1, w1) = gauss_legendre(1);
        assert_eq!(x1, vec![0.0]);
        assert!((w1[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gk15_smooth_and_peaked() {
        let e = adaptive_gk15(f64::exp, 0.0, 1.0, 1e-14).unwrap();
        assert!((e.value - (1f64.exp() - 1.0)).abs() < 1e-14);
        let e = adaptive_gk15(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10).unwrap();
        let exact = 2.0 * 100.0 * (100.0f64).atan();
        assert!((e.value - exact).abs() < 1e-8 * exact);
        assert!(adaptive_gk15(f64::exp, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn tanh_sinh_log_singularity() {
        // int_0^1 ln x dx = -1
        let e = tanh_sinh(f64::ln, 0.0, 1.0, 1e-13).unwrap();
        assert!((e.value + 1.0).abs() < 1e-13, "{e:?}");
        // singular at the right end
        let e = tanh_sinh(|x| (1.0 - x).ln(), 0.0, 1.0, 1e-12).unwrap();
        assert!((e.value + 1.0).abs() < 1e-12, "{e:?}");
        // int_0^c x^2 ln x dx = c^3 (ln c / 3 - 1/9)
        let c = 0.7f64;
        let e = tanh_sinh(|x| x * x * x.ln(), 0.0, c, 1e-14).unwrap();
        assert!((e.value - c.powi(3) * (c.ln() / 3.0 - 1.0 / 9.0)).abs() < 1e-14);
    }
}
