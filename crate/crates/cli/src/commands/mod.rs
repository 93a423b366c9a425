mod constants;
mod ergodic;
mod expand;
mod gk;
mod operator;

use theta_core::ThetaParams;

use crate::args::{Cli, Command};
use crate::error::{CliError, CliResult};

pub fn run(cli: &Cli) -> CliResult<()> {
    if !(cli.tolerance.is_finite() && (1e-15..=1e-3).contains(&cli.tolerance)) {
        return Err(CliError::invalid(format!(
            "tolerance must lie in [1e-15, 1e-3] (got {})",
            cli.tolerance
        )));
    }
    match &cli.command {
        Command::Expand(a) => expand::run(cli, a),
        Command::Constants(a) => constants::run(cli, a),
        Command::Gk(a) => gk::run(cli, a),
        Command::Ergodic(a) => ergodic::run(cli, a),
        Command::Operator(a) => operator::run(cli, a),
    }
}

fn params(cli: &Cli) -> CliResult<ThetaParams> {
    Ok(ThetaParams::new(cli.m)?)
}

/// Rejects counts outside `1..=max`.
fn check_count(value: usize, max: usize, what: &str) -> CliResult<()> {
    if value == 0 || value > max {
        return Err(CliError::invalid(format!(
            "{what} must lie in 1..={max} (got {value})"
        )));
    }
    Ok(())
}
