//! Seeded families of test functions on `[0, theta]` for the contraction
//! checks: constants, non-decreasing piecewise-linear functions and smooth
//! trigonometric combinations.

use rand::Rng;

use crate::grid::{dense_grid, Observable};

/// `c` everywhere.
#[derive(Clone, Debug)]
pub struct Constant(pub f64);

impl Observable for Constant {
    fn value(&self, _: f64) -> f64 {
        self.0
    }
    fn slope(&self, _: f64) -> f64 {
        0.0
    }
}

/// Continuous, non-decreasing, piecewise linear.
#[derive(Clone, Debug)]
pub struct MonotonePiecewise {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl MonotonePiecewise {
    /// `pieces` random segments with non-negative slopes.
    pub fn random<R: Rng>(rng: &mut R, theta: f64, pieces: usize) -> Self {
        let pieces = pieces.max(1);
        let mut inner: Vec<f64> = (0..pieces - 1).map(|_| rng.gen::<f64>() * theta).collect();
        inner.sort_by(f64::total_cmp);
        let mut knots = Vec::with_capacity(pieces + 1);
        knots.push(0.0);
        knots.extend(inner);
        knots.push(theta);
        let mut values = Vec::with_capacity(knots.len());
        let mut v = rng.gen_range(-1.0..1.0);
        values.push(v);
        for w in knots.windows(2) {
            // some flat pieces keep the family from being strictly increasing
            let slope = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..5.0) };
            v += slope * (w[1] - w[0]);
            values.push(v);
        }
        Self { knots, values }
    }

    fn segment(&self, x: f64) -> usize {
        let i = self.knots.partition_point(|&k| k <= x);
        i.clamp(1, self.knots.len() - 1) - 1
    }

    pub fn variation(&self) -> f64 {
        self.values[self.values.len() - 1] - self.values[0]
    }
}

impl Observable for MonotonePiecewise {
    fn value(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        if x1 == x0 {
            return y1;
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    fn slope(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        if x1 == x0 {
            return 0.0;
        }
        (self.values[i + 1] - self.values[i]) / (x1 - x0)
    }
}

/// `b x + sum_j a_j sin(w_j x + p_j)`.
#[derive(Clone, Debug)]
pub struct SmoothLipschitz {
    linear: f64,
    waves: Vec<(f64, f64, f64)>,
}

impl SmoothLipschitz {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let linear = rng.gen_range(-2.0..2.0);
        let waves = (0..3)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.5..12.0),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        Self { linear, waves }
    }

    pub fn identity() -> Self {
        Self {
            linear: 1.0,
            waves: Vec::new(),
        }
    }

    /// `max |f'|` over `points + 1` equispaced points; a lower bound for the
    /// Lipschitz constant.
    pub fn seminorm(&self, theta: f64, points: usize) -> f64 {
        dense_grid(theta, points)
            .into_iter()
            .map(|x| self.slope(x).abs())
            .fold(0.0, f64::max)
    }
}

impl Observable for SmoothLipschitz {
    fn value(&self, x: f64) -> f64 {
        self.linear * x
            + self
                .waves
                .iter()
                .map(|&(a, w, p)| a * (w * x + p).sin())
                .sum::<f64>()
    }

    fn slope(&self, x: f64) -> f64 {
        self.linear
            + self
                .waves
                .iter()
                .map(|&(a, w, p)| a * w * (w * x + p).cos())
                .sum::<f64>()
    }
}
