use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Experiments on theta-expansions x = [a_1 theta, a_2 theta, ...] with
/// theta = 1/sqrt(m).
#[derive(Debug, Parser, Serialize)]
#[command(name = "theta", version, about)]
pub struct Cli {
    /// The integer m >= 2 (not a perfect square) fixing theta = 1/sqrt(m).
    #[arg(long, global = true, default_value_t = 2)]
    pub m: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for every random choice (test functions, orbit seeds).
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Target accuracy of the constants (quadratures and series).
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tolerance: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Command {
    /// Digits, convergents, errors and cylinder of a point.
    Expand(ExpandArgs),
    /// Entropy, Levy and Khintchin constants and contraction ratios.
    Constants(ConstantsArgs),
    /// Gauss-Kuzmin iteration and its decay rate.
    Gk(GkArgs),
    /// Orbit ensembles: Levy, Khintchin and digit-frequency statistics.
    Ergodic(ErgodicArgs),
    /// Transfer operator identities and contraction on test functions.
    Operator(OperatorArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ExpandArgs {
    /// The point: `p/q`, a decimal, or `a,b` for a + b*theta (a, b rational).
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,

    #[arg(long, default_value_t = 10)]
    pub digits: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstantsArgs {
    /// Report every m in 2, 3, 5, 10, 17 instead of --m.
    #[arg(long)]
    pub sweep: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    Uniform,
    Gamma,
    Custom,
}

#[derive(Debug, Args, Serialize)]
pub struct GkArgs {
    #[arg(long, default_value_t = 12)]
    pub iterations: usize,

    #[arg(long, value_enum, default_value_t = Start::Uniform)]
    pub start: Start,

    /// Values of F_0 at the degree+1 Chebyshev nodes on [0, theta], in
    /// increasing x, separated by whitespace or commas. Needed for
    /// `--start custom`.
    #[arg(long)]
    pub grid: Option<PathBuf>,

    /// Polynomial degree of the grid.
    #[arg(long, default_value_t = 64)]
    pub degree: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ErgodicArgs {
    /// Number of exact rational seeds.
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,

    /// Exact orbit length.
    #[arg(long, default_value_t = 200)]
    pub n: usize,

    /// Number of float orbits for digit statistics.
    #[arg(long, default_value_t = 20)]
    pub orbits: usize,

    /// Digits per float orbit.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Constant,
    Monotone,
    Lipschitz,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct OperatorArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::All)]
    pub family: FamilyArg,

    /// Test functions per family.
    #[arg(long, default_value_t = 50)]
    pub count: usize,

    #[arg(long, default_value_t = 64)]
    pub degree: usize,
}
