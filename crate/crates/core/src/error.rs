use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("m must be at least 2 (got {0})")]
    MTooSmall(u64),

    #[error("m must not be a perfect square (got {0}, theta would be rational)")]
    PerfectSquare(u64),

    #[error("point {value} lies outside [0, theta] = [0, {theta}]")]
    Domain { value: f64, theta: f64 },

    #[error("digit {digit} at position {position} is below the minimum digit m = {m}")]
    DigitBelowMinimum { digit: u64, position: usize, m: u64 },

    #[error("digit does not fit in 64 bits")]
    DigitOverflow,

    #[error("expansion terminated after {at} digits, {requested} were requested")]
    Terminated { at: usize, requested: usize },

    #[error("empty digit sequence")]
    EmptyDigits,

    #[error("{what} must be positive")]
    NonPositive { what: &'static str },

    #[error("quadrature did not converge: estimated error {estimate:e} above tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("series cutoff {needed} exceeds the index budget {budget}")]
    CutoffBudget { needed: u64, budget: u64 },

    #[error("invalid operator configuration: {0}")]
    Config(String),

    #[error("not a distribution function: {0}")]
    NotACdf(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("malformed interval set: {0}")]
    Interval(String),

    #[error("insufficient samples: {got} digits, at least {needed} required")]
    InsufficientSamples { got: usize, needed: usize },

    #[error("values belong to different fields (m = {0} and m = {1})")]
    FieldMismatch(u64, u64),
}
