//! Numerical checks of the operator identities and contraction bounds on
//! the seeded test families.

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::families::{Constant, MonotonePiecewise, SmoothLipschitz};
use crate::grid::{dense_grid, Analytic, Observable};
use crate::measure::{contraction_km, contraction_q};
use crate::operator::{lipschitz_seminorm, weight_sum, TransferOperator};

/// Which test functions to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Constant,
    Monotone,
    Lipschitz,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Constant, Family::Monotone, Family::Lipschitz];

    pub fn name(self) -> &'static str {
        match self {
            Family::Constant => "constant",
            Family::Monotone => "monotone",
            Family::Lipschitz => "lipschitz",
        }
    }
}

/// One test function and the measured effect of `U` on it. Columns that do
/// not apply to the family are `None`.
#[derive(Clone, Debug, Serialize)]
pub struct ContractionRow {
    pub family: Family,
    pub index: usize,
    pub var_f: Option<f64>,
    pub var_uf: Option<f64>,
    pub var_ratio: Option<f64>,
    /// `U f` is non-increasing at every sampled point.
    pub uf_non_increasing: Option<bool>,
    pub s_f: Option<f64>,
    pub s_uf: Option<f64>,
    pub s_ratio: Option<f64>,
    /// `max |U f - c|` for the constant family.
    pub constant_deviation: Option<f64>,
}

impl ContractionRow {
    fn empty(family: Family, index: usize) -> Self {
        Self {
            family,
            index,
            var_f: None,
            var_uf: None,
            var_ratio: None,
            uf_non_increasing: None,
            s_f: None,
            s_uf: None,
            s_ratio: None,
            constant_deviation: None,
        }
    }
}

/// Points at which `U f` is evaluated for variation and monotonicity.
const SAMPLE_POINTS: usize = 256;

pub fn family_rows<R: Rng>(
    op: &TransferOperator,
    family: Family,
    count: usize,
    rng: &mut R,
) -> Vec<ContractionRow> {
    let t = op.theta();
    (0..count)
        .map(|index| {
            let mut row = ContractionRow::empty(family, index);
            match family {
                Family::Constant => {
                    let c = Constant(rng.gen_range(-10.0..10.0));
                    let uf = op.apply_u(&c);
                    row.constant_deviation = Some(
                        uf.values()
                            .iter()
                            .map(|v| (v - c.0).abs())
                            .fold(0.0, f64::max),
                    );
                }
                Family::Monotone => {
                    let pieces = rng.gen_range(1..=8);
                    let f = MonotonePiecewise::random(rng, t, pieces);
                    let xs = dense_grid(t, SAMPLE_POINTS);
                    let uf: Vec<f64> = xs.iter().map(|&x| op.u_at(&f, x)).collect();
                    let var_f = f.variation();
                    let var_uf: f64 = uf.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
                    row.var_f = Some(var_f);
                    row.var_uf = Some(var_uf);
                    row.var_ratio = (var_f > 0.0).then(|| var_uf / var_f);
                    row.uf_non_increasing = Some(uf.windows(2).all(|w| w[1] <= w[0] + 1e-13));
                }
                Family::Lipschitz => {
                    let f = if index == 0 {
                        SmoothLipschitz::identity()
                    } else {
                        SmoothLipschitz::random(rng)
                    };
                    let s_f = f.seminorm(t, 4096);
                    let s_uf = lipschitz_seminorm(&op.apply_u(&f));
                    row.s_f = Some(s_f);
                    row.s_uf = Some(s_uf);
                    row.s_ratio = (s_f > 0.0).then(|| s_uf / s_f);
                }
            }
            row
        })
        .collect()
}

/// Normalization, fixed-point and power-relation residuals.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityChecks {
    /// `max_x |sum_{i<N} P_i(x) + tail - 1|` over the grid nodes.
    pub weight_sum: f64,
    /// `max |U 1 - 1|`.
    pub u_fixes_constants: f64,
    /// `max |V h - h|` with `h = 1/(1 + theta x)`.
    pub v_fixes_invariant: f64,
    /// `max |S 1 - 1|` with the invariant density.
    pub s_fixes_constants: f64,
    /// `V^2 f` by repeated application against `U^2((1+theta x) f)/(1+theta x)`.
    pub v_power_gap: f64,
    /// `S^2 f` by repeated application against the closed power formula.
    pub s_power_gap: f64,
    /// `S f` through `U` against `V(f h)/h`.
    pub s_route_gap: f64,
}

pub fn identity_checks(op: &TransferOperator) -> Result<IdentityChecks> {
    let t = op.theta();
    let params = op.params();
    let nodes = op.sample(|x| x);
    let weight_sum = nodes
        .nodes()
        .iter()
        .map(|&x| (weight_sum(x, op.cutoff(), params) - 1.0).abs())
        .fold(0.0, f64::max);
    let one = Constant(1.0);
    let u_fixes_constants = op.apply_u(&one).sup_distance(|_| 1.0);
    let h = Analytic::new(move |x: f64| 1.0 / (1.0 + t * x), move |x: f64| -t / (1.0 + t * x).powi(2));
    let v_fixes_invariant = op.apply_v(&h).sup_distance(|x| h.value(x));
    let s_fixes_constants = op.apply_s(&one, &h)?.sup_distance(|_| 1.0);

    let f = op.sample(|x| (5.0 * x).sin() + x * x - 0.3);
    let v2 = op.apply_v_power(&f, 2);
    let v2u = op.apply_v_power_via_u(&f, 2);
    let v_power_gap = v2.sup_distance(|x| v2u.eval(x));

    let dens = op.sample(|x| 1.0 + x * (t - x));
    let s1 = op.apply_s(&f, &dens)?;
    let s2_repeated = op.apply_s(&s1, &dens)?;
    let s2 = op.apply_s_power(&f, &dens, 2)?;
    let s_power_gap = s2.sup_distance(|x| s2_repeated.eval(x));
    let s_direct = op.apply_s_direct(&f, &dens)?;
    let s_route_gap = s1.sup_distance(|x| s_direct.eval(x));
    Ok(IdentityChecks {
        weight_sum,
        u_fixes_constants,
        v_fixes_invariant,
        s_fixes_constants,
        v_power_gap,
        s_power_gap,
        s_route_gap,
    })
}

/// Bounds the family rows are compared against.
#[derive(Clone, Debug, Serialize)]
pub struct ContractionBounds {
    /// `1/(m+1)`.
    pub k_m: f64,
    pub q: f64,
    pub variation_slack: f64,
    pub lipschitz_slack: f64,
    pub constant_slack: f64,
}

impl ContractionBounds {
    pub fn new(op: &TransferOperator) -> Result<Self> {
        let km = contraction_km(op.params());
        Ok(Self {
            k_m: *km.numer() as f64 / *km.denom() as f64,
            q: contraction_q(op.params(), 1e-13)?.0.value,
            variation_slack: 1e-10,
            lipschitz_slack: 1e-8,
            constant_slack: 1e-12,
        })
    }

    pub fn row_ok(&self, row: &ContractionRow) -> bool {
        let var_ok = match (row.var_f, row.var_uf) {
            (Some(vf), Some(vu)) => vu <= self.k_m * vf + self.variation_slack,
            _ => true,
        };
        let s_ok = match (row.s_f, row.s_uf) {
            (Some(sf), Some(su)) => su <= self.q * sf + self.lipschitz_slack,
            _ => true,
        };
        let c_ok = row.constant_deviation.map_or(true, |d| d <= self.constant_slack);
        var_ok && s_ok && c_ok && row.uf_non_increasing.unwrap_or(true)
    }
}
