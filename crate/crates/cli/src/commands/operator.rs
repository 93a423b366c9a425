use serde::Serialize;
use theta_core::contraction::{
    family_rows, identity_checks, ContractionBounds, ContractionRow, Family, IdentityChecks,
};
use theta_core::monte_carlo::RngConfig;
use theta_core::operator::{OperatorConfig, TransferOperator};

use super::{check_count, params};
use crate::args::{Cli, FamilyArg, Format, OperatorArgs};
use crate::error::{CliError, CliResult};
use crate::report::{csv_bytes, emit, opt, references, summary_path, CsvRow, Report};

/// Thresholds applied to [`IdentityChecks`].
#[derive(Clone, Copy, Serialize)]
struct IdentityLimits {
    weight_sum: f64,
    u_fixes_constants: f64,
    v_fixes_invariant: f64,
    power_relations: f64,
}

const LIMITS: IdentityLimits = IdentityLimits {
    weight_sum: 1e-14,
    u_fixes_constants: 1e-12,
    v_fixes_invariant: 1e-10,
    power_relations: 1e-10,
};

fn identities_hold(c: &IdentityChecks) -> bool {
    c.weight_sum <= LIMITS.weight_sum
        && c.u_fixes_constants <= LIMITS.u_fixes_constants
        && c.s_fixes_constants <= LIMITS.u_fixes_constants
        && c.v_fixes_invariant <= LIMITS.v_fixes_invariant
        && c.v_power_gap <= LIMITS.power_relations
        && c.s_power_gap <= LIMITS.power_relations
        && c.s_route_gap <= LIMITS.power_relations
}

#[derive(Clone, Serialize)]
struct FamilySummary {
    family: Family,
    count: usize,
    all_within_bounds: bool,
    max_var_ratio: Option<f64>,
    max_s_ratio: Option<f64>,
    max_constant_deviation: Option<f64>,
}

fn max_of(rows: &[Row], f: impl Fn(&ContractionRow) -> Option<f64>) -> Option<f64> {
    rows.iter().filter_map(|r| f(&r.row)).reduce(f64::max)
}

#[derive(Serialize)]
struct Row {
    #[serde(flatten)]
    row: ContractionRow,
    within_bounds: bool,
}

impl CsvRow for Row {
    const HEADER: &'static [&'static str] = &[
        "family",
        "index",
        "var_f",
        "var_uf",
        "var_ratio",
        "uf_non_increasing",
        "s_f",
        "s_uf",
        "s_ratio",
        "constant_deviation",
        "within_bounds",
    ];

    fn fields(&self) -> Vec<String> {
        let r = &self.row;
        vec![
            r.family.name().to_string(),
            r.index.to_string(),
            opt(r.var_f),
            opt(r.var_uf),
            opt(r.var_ratio),
            opt(r.uf_non_increasing),
            opt(r.s_f),
            opt(r.s_uf),
            opt(r.s_ratio),
            opt(r.constant_deviation),
            self.within_bounds.to_string(),
        ]
    }
}

#[derive(Serialize)]
struct OperatorResult<'a> {
    m: u64,
    config: OperatorConfig,
    cutoff: u64,
    identities: IdentityChecks,
    identity_limits: IdentityLimits,
    identities_hold: bool,
    bounds: ContractionBounds,
    families: Vec<FamilySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<&'a [Row]>,
}

pub fn run(cli: &Cli, args: &OperatorArgs) -> CliResult<()> {
    let params = params(cli)?;
    check_count(args.count, 10_000, "--count")?;
    if args.degree > 512 {
        return Err(CliError::invalid("--degree must be at most 512"));
    }
    let config = OperatorConfig {
        degree: args.degree,
        ..OperatorConfig::default()
    };
    config.validate()?;
    let op = TransferOperator::new(params, config)?;
    let bounds = ContractionBounds::new(&op)?;
    let identities = identity_checks(&op)?;

    let families: Vec<Family> = match args.family {
        FamilyArg::Constant => vec![Family::Constant],
        FamilyArg::Monotone => vec![Family::Monotone],
        FamilyArg::Lipschitz => vec![Family::Lipschitz],
        FamilyArg::All => Family::ALL.to_vec(),
    };
    let rng = RngConfig::new(cli.seed);
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for family in families {
        // one stream per family, so a family's rows do not depend on --family
        let stream = Family::ALL.iter().position(|&f| f == family).expect("listed") as u64;
        let fam_rows: Vec<Row> = family_rows(&op, family, args.count, &mut rng.stream(stream))
            .into_iter()
            .map(|row| Row {
                within_bounds: bounds.row_ok(&row),
                row,
            })
            .collect();
        summaries.push(FamilySummary {
            family,
            count: fam_rows.len(),
            all_within_bounds: fam_rows.iter().all(|r| r.within_bounds),
            max_var_ratio: max_of(&fam_rows, |r| r.var_ratio),
            max_s_ratio: max_of(&fam_rows, |r| r.s_ratio),
            max_constant_deviation: max_of(&fam_rows, |r| r.constant_deviation),
        });
        rows.extend(fam_rows);
    }

    let refs = references(&params, cli.tolerance)?;
    let build = |with_rows: bool| OperatorResult {
        m: cli.m,
        config,
        cutoff: op.cutoff(),
        identities_hold: identities_hold(&identities),
        identities: identities.clone(),
        identity_limits: LIMITS,
        bounds: bounds.clone(),
        families: summaries.clone(),
        rows: with_rows.then_some(rows.as_slice()),
    };
    match cli.format {
        Format::Json => emit(cli.out.as_deref(), &Report::new(cli, refs, build(true)).to_json()?),
        Format::Csv => {
            emit(cli.out.as_deref(), &csv_bytes(&rows)?)?;
            if let Some(out) = &cli.out {
                let bytes = Report::new(cli, refs, build(false)).to_json()?;
                emit(Some(&summary_path(out)), &bytes)?;
            }
            Ok(())
        }
    }
}
