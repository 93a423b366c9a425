use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use theta_core::measure::{constants_report, ConstantsReport};
use theta_core::ThetaParams;

use crate::args::Cli;
use crate::error::CliResult;

#[derive(Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: Tool = Tool {
    name: "theta",
    version: env!("CARGO_PKG_VERSION"),
};

/// Envelope of every JSON report: the tool, the exact invocation and the
/// constants the result was compared against.
#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    pub tool: Tool,
    pub run: &'a Cli,
    pub references: Vec<ConstantsReport>,
    pub result: T,
}

impl<'a, T: Serialize> Report<'a, T> {
    pub fn new(cli: &'a Cli, references: Vec<ConstantsReport>, result: T) -> Self {
        Self {
            tool: TOOL,
            run: cli,
            references,
            result,
        }
    }

    pub fn to_json(&self) -> CliResult<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self)?;
        out.push(b'\n');
        Ok(out)
    }
}

pub fn references(params: &ThetaParams, tol: f64) -> CliResult<Vec<ConstantsReport>> {
    Ok(vec![constants_report(params, tol)?])
}

/// Writes to `--out` or stdout.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// `runs/gk.csv` -> `runs/gk.summary.json`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

/// Serializes rows under a fixed header.
pub fn csv_bytes<R: CsvRow>(rows: &[R]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(R::HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.into_inner()
        .map_err(|e| crate::error::CliError::runtime(e.to_string()))
}

pub trait CsvRow {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}
