use theta_core::monte_carlo::{run_ergodic, ErgodicConfig, HistogramBin, RngConfig};

use super::{check_count, params};
use crate::args::{Cli, ErgodicArgs, Format};
use crate::error::CliResult;
use crate::report::{csv_bytes, emit, references, summary_path, CsvRow, Report};

impl CsvRow for HistogramBin {
    const HEADER: &'static [&'static str] = &["k", "count", "frequency", "law", "sigma"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.k.to_string(),
            self.count.to_string(),
            self.frequency.to_string(),
            self.law.to_string(),
            self.sigma.to_string(),
        ]
    }
}

/// Powers of ten from 1e3 up to the orbit length, or the length itself for
/// short orbits.
fn checkpoints(samples: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1_000usize), |&c| c.checked_mul(10))
        .take_while(|&c| c <= samples)
        .collect();
    if out.is_empty() {
        out.push(samples);
    }
    out
}

pub fn run(cli: &Cli, args: &ErgodicArgs) -> CliResult<()> {
    let params = params(cli)?;
    let config = ErgodicConfig {
        exact_orbits: args.seeds,
        exact_length: args.n,
        float_orbits: args.orbits,
        float_length: args.samples,
        checkpoints: checkpoints(args.samples),
        ..ErgodicConfig::default()
    };
    config.validate()?;
    check_count(args.seeds, 100_000, "--seeds")?;
    check_count(args.n, 100_000, "--n")?;
    check_count(args.orbits, 100_000, "--orbits")?;
    check_count(args.samples, 100_000_000, "--samples")?;

    let report = run_ergodic(&params, &config, RngConfig::new(cli.seed))?;
    let refs = references(&params, cli.tolerance)?;
    match cli.format {
        Format::Json => emit(cli.out.as_deref(), &Report::new(cli, refs, &report).to_json()?),
        Format::Csv => {
            emit(cli.out.as_deref(), &csv_bytes(&report.digit_histogram.bins)?)?;
            if let Some(out) = &cli.out {
                let bytes = Report::new(cli, refs, &report).to_json()?;
                emit(Some(&summary_path(out)), &bytes)?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_ladder() {
        assert_eq!(checkpoints(100_000), vec![1_000, 10_000, 100_000]);
        assert_eq!(checkpoints(50_000), vec![1_000, 10_000]);
        assert_eq!(checkpoints(500), vec![500]);
    }
}
