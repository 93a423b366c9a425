//! Functions on `[0, theta]` sampled at Chebyshev-Lobatto points and
//! evaluated by barycentric interpolation.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::quadrature::GaussLegendre;

/// Something that can be evaluated and differentiated on `[0, theta]`.
pub trait Observable: Sync {
    fn value(&self, x: f64) -> f64;
    fn slope(&self, x: f64) -> f64;
}

/// A closed-form function together with its derivative.
pub struct Analytic<F, D> {
    pub f: F,
    pub df: D,
}

impl<F, D> Analytic<F, D>
where
    F: Fn(f64) -> f64 + Sync,
    D: Fn(f64) -> f64 + Sync,
{
    pub fn new(f: F, df: D) -> Self {
        Self { f, df }
    }
}

impl<F, D> Observable for Analytic<F, D>
where
    F: Fn(f64) -> f64 + Sync,
    D: Fn(f64) -> f64 + Sync,
{
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn slope(&self, x: f64) -> f64 {
        (self.df)(x)
    }
}

/// Node set shared by every function of the same degree.
#[derive(Debug)]
struct Nodes {
    theta: f64,
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Nodes {
    fn new(theta: f64, degree: usize) -> Self {
        let n = degree as f64;
        // theta sin^2(pi j / 2n) = theta (1 - cos(pi j/n))/2, accurate near 0
        let x = (0..=degree)
            .map(|j| theta * (FRAC_PI_2 * j as f64 / n).sin().powi(2))
            .collect();
        let w = (0..=degree)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == degree {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Self { theta, x, w }
    }
}

#[derive(Clone, Debug)]
pub struct GridFunction {
    nodes: Arc<Nodes>,
    values: Vec<f64>,
}

impl GridFunction {
    /// Samples `f` at the `degree + 1` nodes on `[0, theta]`.
    pub fn from_fn<F: Fn(f64) -> f64>(theta: f64, degree: usize, f: F) -> Self {
        assert!(degree >= 1, "degree must be positive");
        let nodes = Arc::new(Nodes::new(theta, degree));
        let values = nodes.x.iter().map(|&x| f(x)).collect();
        Self { nodes, values }
    }

    /// A function with the same nodes and new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len(), "node count mismatch");
        Self {
            nodes: Arc::clone(&self.nodes),
            values,
        }
    }

    pub fn nodes_for(theta: f64, degree: usize) -> Vec<f64> {
        Nodes::new(theta, degree).x
    }

    pub fn theta(&self) -> f64 {
        self.nodes.theta
    }

    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes.x
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map<F: Fn(f64, f64) -> f64>(&self, f: F) -> Self {
        let values = self
            .nodes
            .x
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| f(x, v))
            .collect();
        self.with_values(values)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &wj), &fj) in self.nodes.x.iter().zip(&self.nodes.w).zip(&self.values) {
            let d = x - xj;
            if d == 0.0 {
                return fj;
            }
            let c = wj / d;
            num += c * fj;
            den += c;
        }
        num / den
    }

    /// Derivative of the interpolant, by the differentiation-matrix row at a
    /// node and the Schneider-Werner formula elsewhere.
    pub fn derivative_at(&self, x: f64) -> f64 {
        let xs = &self.nodes.x;
        let ws = &self.nodes.w;
        if let Some(i) = xs.iter().position(|&xj| xj == x) {
            return self.node_derivative(i);
        }
        // values are shifted by the nearest node's value so that p - f_j
        // stays accurate when x is within a few ulps of that node
        let near = xs
            .iter()
            .enumerate()
            .min_by(|a, b| (x - a.1).abs().total_cmp(&(x - b.1).abs()))
            .map(|(i, _)| i)
            .expect("nodes");
        let shift = self.values[near];
        let (mut qn, mut den) = (0.0, 0.0);
        for ((&xj, &wj), &fj) in xs.iter().zip(ws).zip(&self.values) {
            let c = wj / (x - xj);
            qn += c * (fj - shift);
            den += c;
        }
        let q = qn / den;
        let mut num = 0.0;
        for ((&xj, &wj), &fj) in xs.iter().zip(ws).zip(&self.values) {
            let d = x - xj;
            num += wj / d * (q - (fj - shift)) / d;
        }
        num / den
    }

    fn node_derivative(&self, i: usize) -> f64 {
        let xs = &self.nodes.x;
        let ws = &self.nodes.w;
        let fi = self.values[i];
        let mut acc = 0.0;
        for j in 0..xs.len() {
            if j != i {
                acc += (ws[j] / ws[i]) * (self.values[j] - fi) / (xs[i] - xs[j]);
            }
        }
        acc
    }

    /// The derivative as a grid function (exact for the interpolant).
    pub fn derivative(&self) -> Self {
        let values = (0..self.values.len())
            .map(|i| self.node_derivative(i))
            .collect();
        self.with_values(values)
    }

    /// Integral of the interpolant over `[a, b]`, exact up to rounding.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let rule = GaussLegendre::new(self.degree() / 2 + 2);
        rule.integrate(|x| self.eval(x), a, b)
    }

    /// The `4 degree + 1` equispaced points used for sup-norms.
    pub fn dense_points(&self) -> Vec<f64> {
        dense_grid(self.theta(), 4 * self.degree())
    }

    /// `max |self - g|` over the dense grid.
    pub fn sup_distance<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.dense_points()
            .into_iter()
            .map(|x| (self.eval(x) - g(x)).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_distance(|_| 0.0)
    }
}

impl Observable for GridFunction {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }
    fn slope(&self, x: f64) -> f64 {
        self.derivative_at(x)
    }
}

/// `n + 1` equispaced points covering `[0, theta]`, endpoints exact.
pub fn dense_grid(theta: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            if k == n {
                theta
            } else {
                theta * k as f64 / n as f64
            }
        })
        .collect()
}
