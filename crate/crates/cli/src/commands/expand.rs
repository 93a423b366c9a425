use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use theta_core::expansion::{orbit, Convergents, Cylinder, DigitSequence};
use theta_core::qtheta::{limit_denominator, parse_rational, rational_string};
use theta_core::{QThetaNumber, ThetaParams};

use super::{check_count, params};
use crate::args::{Cli, ExpandArgs, Format};
use crate::error::{CliError, CliResult};
use crate::report::{csv_bytes, emit, references, CsvRow, Report};

const MAX_DIGITS: usize = 10_000;
const DECIMAL_MAX_DENOMINATOR: u64 = 1_000_000_000;

#[derive(Serialize)]
struct Point {
    input: String,
    exact: QThetaNumber,
    value: f64,
    /// Set when a decimal was replaced by a nearby rational.
    conversion: Option<String>,
}

#[derive(Serialize)]
struct Rank {
    n: usize,
    digit: u64,
    p: QThetaNumber,
    q: QThetaNumber,
    convergent: f64,
    /// `x - p_n/q_n`.
    error: QThetaNumber,
    error_value: f64,
    /// The error equals `(-1)^n T^n x / (q_n (q_n + T^n x q_{n-1}))`.
    error_identity: bool,
}

#[derive(Serialize)]
struct CylinderOut {
    #[serde(flatten)]
    cylinder: Cylinder,
    lower_value: f64,
    upper_value: f64,
    normalized_measure: QThetaNumber,
    /// Agrees with `1/(q_n (q_n + theta q_{n-1}))`.
    measure_formula_holds: bool,
}

#[derive(Serialize)]
struct ExpandResult {
    m: u64,
    theta: f64,
    x: Point,
    expansion: DigitSequence,
    ranks: Vec<Rank>,
    cylinder: CylinderOut,
}

impl CsvRow for Rank {
    const HEADER: &'static [&'static str] = &[
        "n",
        "digit",
        "p_a",
        "p_b",
        "q_a",
        "q_b",
        "convergent",
        "error",
        "error_identity",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.digit.to_string(),
            rational_string(&self.p.rational_part()),
            rational_string(&self.p.theta_part()),
            rational_string(&self.q.rational_part()),
            rational_string(&self.q.theta_part()),
            self.convergent.to_string(),
            self.error_value.to_string(),
            self.error_identity.to_string(),
        ]
    }
}

fn rational(s: &str) -> CliResult<BigRational> {
    parse_rational(s).ok_or_else(|| CliError::invalid(format!("cannot read {s:?} as a rational number")))
}

/// `p/q` and integers are exact, `a,b` is `a + b theta`, anything else is a
/// decimal rounded to a denominator of at most 1e9.
fn parse_point(input: &str, m: u64) -> CliResult<Point> {
    let s = input.trim();
    let (exact, conversion) = if let Some((a, b)) = s.split_once(',') {
        (QThetaNumber::new(rational(a)?, rational(b)?, m), None)
    } else if s.contains('/') || (!s.is_empty() && s.trim_start_matches(['-', '+']).chars().all(|c| c.is_ascii_digit())) {
        (QThetaNumber::from_rational(rational(s)?, m), None)
    } else {
        let r = rational(s)?;
        let near = limit_denominator(&r, &BigInt::from(DECIMAL_MAX_DENOMINATOR));
        let note = format!(
            "decimal {s} read as {} (denominator at most {DECIMAL_MAX_DENOMINATOR})",
            rational_string(&near)
        );
        eprintln!("note: {note}");
        (QThetaNumber::from_rational(near, m), Some(note))
    };
    Ok(Point {
        input: input.to_string(),
        value: exact.to_f64(),
        exact,
        conversion,
    })
}

fn ranks(x: &QThetaNumber, points: &[QThetaNumber], digits: &[u64], conv: &Convergents) -> Vec<Rank> {
    let m = x.m();
    (1..=digits.len())
        .map(|n| {
            let c = conv.pair(n);
            let q_prev = &conv.pair(n - 1).q;
            let error = x - &c.p.checked_div(&c.q).expect("q_n > 0");
            let tail = &points[n];
            let sign = QThetaNumber::from_integer(if n % 2 == 1 { -1 } else { 1 }, m);
            let den = &c.q * &(&c.q + &(tail * q_prev));
            let formula = (&sign * tail).checked_div(&den).expect("positive denominator");
            Rank {
                n,
                digit: digits[n - 1],
                convergent: c.p.checked_div(&c.q).expect("q_n > 0").to_f64(),
                p: c.p.clone(),
                q: c.q.clone(),
                error_value: error.to_f64(),
                error_identity: formula == error,
                error,
            }
        })
        .collect()
}

pub fn run(cli: &Cli, args: &ExpandArgs) -> CliResult<()> {
    let params: ThetaParams = params(cli)?;
    check_count(args.digits, MAX_DIGITS, "--digits")?;
    let x = parse_point(&args.x, cli.m)?;
    if x.exact.is_zero() {
        return Err(CliError::invalid(format!(
            "x must lie in (0, theta] = (0, {}]",
            params.theta()
        )));
    }
    let orb = orbit(&x.exact, args.digits, &params)?;
    let digits = &orb.digits.digits;
    let conv = Convergents::new(digits, &params)?;
    let ranks = ranks(&x.exact, &orb.points, digits, &conv);
    let n = digits.len();
    let cyl = conv.cylinder(digits, n);
    let normalized_measure = cyl.normalized_measure();
    let cylinder = CylinderOut {
        lower_value: cyl.lower.to_f64(),
        upper_value: cyl.upper.to_f64(),
        measure_formula_holds: normalized_measure == conv.cylinder_measure(n),
        normalized_measure,
        cylinder: cyl,
    };

    let bytes = match cli.format {
        Format::Csv => csv_bytes(&ranks)?,
        Format::Json => {
            let result = ExpandResult {
                m: cli.m,
                theta: params.theta(),
                x,
                expansion: orb.digits.clone(),
                ranks,
                cylinder,
            };
            Report::new(cli, references(&params, cli.tolerance)?, result).to_json()?
        }
    };
    emit(cli.out.as_deref(), &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_syntax() {
        let p = parse_point("1/2", 2).unwrap();
        assert_eq!(p.exact, QThetaNumber::from_ratio(1, 2, 2));
        assert!(p.conversion.is_none());
        let p = parse_point("0,1/2", 2).unwrap();
        assert_eq!(p.exact, QThetaNumber::theta(2).mul_rational(&BigRational::new(1.into(), 2.into())));
        let p = parse_point("0.25", 2).unwrap();
        assert_eq!(p.exact, QThetaNumber::from_ratio(1, 4, 2));
        assert!(p.conversion.is_some());
        assert!(parse_point("abc", 2).is_err());
        assert!(parse_point("1/0", 2).is_err());
    }
}
