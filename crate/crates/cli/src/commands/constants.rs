use theta_core::measure::{constants_report, ConstantsReport};
use theta_core::ThetaParams;

use crate::args::{Cli, ConstantsArgs, Format};
use crate::error::CliResult;
use crate::report::{csv_bytes, emit, CsvRow, Report};

pub const SWEEP: [u64; 5] = [2, 3, 5, 10, 17];

struct Row<'a>(&'a ConstantsReport);

impl CsvRow for Row<'_> {
    const HEADER: &'static [&'static str] = &[
        "m",
        "theta",
        "beta",
        "entropy",
        "entropy_rohlin",
        "khintchin_geo",
        "k_m",
        "q",
        "q_lt_theta",
    ];

    fn fields(&self) -> Vec<String> {
        let r = self.0;
        vec![
            r.m.to_string(),
            r.theta.to_string(),
            r.beta.to_string(),
            r.entropy.to_string(),
            r.entropy_rohlin.to_string(),
            r.khintchin_geo.to_string(),
            r.k_m.clone(),
            r.q.to_string(),
            r.q_lt_theta.to_string(),
        ]
    }
}

pub fn run(cli: &Cli, args: &ConstantsArgs) -> CliResult<()> {
    let ms: Vec<u64> = if args.sweep { SWEEP.to_vec() } else { vec![cli.m] };
    let mut reports = Vec::with_capacity(ms.len());
    for m in ms {
        let params = ThetaParams::new(m)?;
        reports.push(constants_report(&params, cli.tolerance)?);
    }
    let bytes = match cli.format {
        Format::Csv => csv_bytes(&reports.iter().map(Row).collect::<Vec<_>>())?,
        // the result is the reference table itself
        Format::Json => Report::new(cli, reports.clone(), reports).to_json()?,
    };
    emit(cli.out.as_deref(), &bytes)
}
