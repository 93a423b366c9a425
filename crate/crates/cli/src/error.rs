use std::fmt;

use theta_core::Error as CoreError;

/// Failure of a command. Validation failures exit with 2, everything that
/// goes wrong after the inputs were accepted exits with 3.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::MTooSmall(_)
            | CoreError::PerfectSquare(_)
            | CoreError::Domain { .. }
            | CoreError::DigitBelowMinimum { .. }
            | CoreError::EmptyDigits
            | CoreError::NonPositive { .. }
            | CoreError::Config(_)
            | CoreError::NotACdf(_)
            | CoreError::InvalidDensity(_)
            | CoreError::Interval(_)
            | CoreError::InsufficientSamples { .. } => CliError::Validation(msg),
            CoreError::DigitOverflow
            | CoreError::Terminated { .. }
            | CoreError::Quadrature { .. }
            | CoreError::CutoffBudget { .. }
            | CoreError::FieldMismatch(..) => CliError::Runtime(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
