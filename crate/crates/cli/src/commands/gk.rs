use std::fs;
use std::path::Path;

use serde::Serialize;
use theta_core::gauss_kuzmin::{decay_report, DecayChecks, DecayRow, StartDistribution};
use theta_core::grid::GridFunction;
use theta_core::operator::{OperatorConfig, TransferOperator};

use super::{check_count, params};
use crate::args::{Cli, Format, GkArgs, Start};
use crate::error::{CliError, CliResult};
use crate::report::{csv_bytes, emit, opt, references, summary_path, CsvRow, Report};

const MAX_ITERATIONS: usize = 200;
const MAX_DEGREE: usize = 512;

struct Row<'a> {
    row: &'a DecayRow,
    q: f64,
}

impl CsvRow for Row<'_> {
    const HEADER: &'static [&'static str] = &["n", "sup_error", "ratio", "M_n", "q_reference"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.row.n.to_string(),
            self.row.sup_error.to_string(),
            opt(self.row.ratio),
            self.row.m_n.to_string(),
            self.q.to_string(),
        ]
    }
}

/// The JSON written next to a CSV table.
#[derive(Serialize)]
struct Summary<'a> {
    m: u64,
    start: &'a str,
    degree: usize,
    q_reference: f64,
    noise_floor: f64,
    iterations: usize,
    checks: &'a DecayChecks,
}

fn read_grid(path: &Path, theta: f64, degree: usize) -> CliResult<GridFunction> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read grid file {}: {e}", path.display())))?;
    let values = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::invalid(format!("grid file: {t:?} is not a finite number")))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    if values.len() != degree + 1 {
        return Err(CliError::invalid(format!(
            "grid file holds {} values, degree {degree} needs {}",
            values.len(),
            degree + 1
        )));
    }
    Ok(GridFunction::from_fn(theta, degree, |_| 0.0).with_values(values))
}

pub fn run(cli: &Cli, args: &GkArgs) -> CliResult<()> {
    let params = params(cli)?;
    check_count(args.iterations, MAX_ITERATIONS, "--iterations")?;
    if args.degree > MAX_DEGREE {
        return Err(CliError::invalid(format!("--degree must be at most {MAX_DEGREE}")));
    }
    let config = OperatorConfig {
        degree: args.degree,
        ..OperatorConfig::default()
    };
    config.validate()?;
    let start = match (args.start, &args.grid) {
        (Start::Uniform, None) => StartDistribution::Uniform,
        (Start::Gamma, None) => StartDistribution::Gamma,
        (Start::Custom, Some(path)) => StartDistribution::Custom(read_grid(path, params.theta(), args.degree)?),
        (Start::Custom, None) => return Err(CliError::invalid("--start custom needs --grid FILE")),
        (_, Some(_)) => return Err(CliError::invalid("--grid is only used with --start custom")),
    };
    let op = TransferOperator::new(params, config)?;
    let report = decay_report(&op, &start, args.iterations)?;

    match cli.format {
        Format::Json => {
            let bytes = Report::new(cli, references(&params, cli.tolerance)?, &report).to_json()?;
            emit(cli.out.as_deref(), &bytes)
        }
        Format::Csv => {
            let rows: Vec<Row> = report
                .rows
                .iter()
                .map(|row| Row {
                    row,
                    q: report.q_reference,
                })
                .collect();
            emit(cli.out.as_deref(), &csv_bytes(&rows)?)?;
            if let Some(out) = &cli.out {
                let summary = Summary {
                    m: report.m,
                    start: &report.start,
                    degree: report.degree,
                    q_reference: report.q_reference,
                    noise_floor: report.noise_floor,
                    iterations: args.iterations,
                    checks: &report.checks,
                };
                let bytes = Report::new(cli, references(&params, cli.tolerance)?, summary).to_json()?;
                emit(Some(&summary_path(out)), &bytes)?;
            }
            Ok(())
        }
    }
}
