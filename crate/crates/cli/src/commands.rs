use sarg04_core::incoherent::{upper_rate, upper_threshold};
use sarg04_core::lower_bound::{r1, threshold, LowerBoundOptions, Protocol};
use sarg04_core::pns::EveOptions;
use sarg04_core::sweep::{comparison_table, sweep, visibility_table, PracticalOptions, SweepRecord};
use sarg04_core::Execution;

use crate::config::{GridSpec, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Report, Table};

/// Rendered result of one subcommand.
pub enum Outcome {
    Table(Table),
    Report(Report),
}

pub const PRACTICAL_COLUMNS: [&str; 10] =
    ["distance_km", "mu_opt", "q_opt", "r_sk", "qber", "p_u1", "p_s2", "p_s3", "p_i32", "feasible"];

const DEFAULT_QBER_GRID: GridSpec = GridSpec { start: 0.0, end: 0.15, step: 0.01 };
const DEFAULT_SWEEP: GridSpec = GridSpec { start: 24.0, end: 100.0, step: 1.0 };

pub fn lower(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let protocol = cfg.protocol.unwrap_or(Protocol::Sarg04);
    let preprocessing = cfg.preprocessing_or_default();
    let opts = LowerBoundOptions::default();
    if let Some(grid) = cfg.qber_grid {
        let mut table = Table::new(vec!["qber", "r1", "q_opt"]);
        for qber in grid.values() {
            let r = r1(protocol, qber, preprocessing, &opts)?;
            table.push(vec![Cell::num(qber), Cell::num(r.r), Cell::num(r.q)]);
        }
        return Ok(Outcome::Table(table));
    }
    let mut report = Report::default();
    report
        .add("protocol", Cell::Text(protocol.to_string()))
        .add("preprocessing", Cell::Bool(preprocessing));
    if let Some(qber) = cfg.qber {
        let r = r1(protocol, qber, preprocessing, &opts)?;
        report
            .add("qber", Cell::num(qber))
            .add("r1", Cell::num(r.r))
            .add("q_opt", Cell::num(r.q));
    }
    report.add("threshold", Cell::num(threshold(protocol, preprocessing, &opts)?));
    Ok(Outcome::Report(report))
}

pub fn upper(cfg: &RunConfig, find_threshold: bool) -> Result<Outcome, CliError> {
    let preprocessing = cfg.preprocessing_or_default();
    if let Some(grid) = cfg.qber_grid {
        let mut table = Table::new(vec!["qber", "r_sk", "q_opt"]);
        for qber in grid.values() {
            let r = upper_rate(qber, preprocessing)?;
            table.push(vec![Cell::num(qber), Cell::num(r.r_sk), Cell::num(r.q_opt)]);
        }
        return Ok(Outcome::Table(table));
    }
    let mut report = Report::default();
    report.add("preprocessing", Cell::Bool(preprocessing));
    if let Some(qber) = cfg.qber {
        let r = upper_rate(qber, preprocessing)?;
        report
            .add("qber", Cell::num(qber))
            .add("r_sk", Cell::num(r.r_sk))
            .add("q_opt", Cell::num(r.q_opt));
    }
    if find_threshold || cfg.qber.is_none() {
        report.add("threshold", Cell::num(upper_threshold(preprocessing)?));
    }
    Ok(Outcome::Report(report))
}

pub fn practical(cfg: &RunConfig, execution: Execution) -> Result<Outcome, CliError> {
    let range = GridSpec {
        start: cfg.d_min.unwrap_or(DEFAULT_SWEEP.start),
        end: cfg.d_max.unwrap_or(DEFAULT_SWEEP.end),
        step: cfg.step.unwrap_or(DEFAULT_SWEEP.step),
    };
    if range.end < range.start {
        return Err(CliError::Invalid(format!("sweep {range} ends before it starts")));
    }
    let opts = PracticalOptions {
        eve: EveOptions { n_max: cfg.n_max_or_default(), execution, ..EveOptions::default() },
        preprocessing: cfg.preprocessing_or_default(),
        execution,
        ..PracticalOptions::default()
    };
    let visibility = cfg.visibility.unwrap_or(1.0);
    let records = sweep(range.start, range.end, range.step, visibility, &cfg.device(), &opts)?;
    if !records.iter().any(|r| r.feasible) {
        return Err(CliError::InfeasibleEverywhere(format!("{range} km")));
    }
    let mut table = Table::new(PRACTICAL_COLUMNS.to_vec());
    for r in &records {
        table.push(practical_row(r));
    }
    Ok(Outcome::Table(table))
}

fn practical_row(r: &SweepRecord) -> Vec<Cell> {
    let st = r.eve_strategy.as_ref();
    let strategy = |f: &dyn Fn(&sarg04_core::pns::PnsStrategy) -> f64| Cell::Num(st.map(f));
    vec![
        Cell::num(r.distance_km),
        Cell::num(r.mu_opt),
        Cell::num(r.q_opt),
        Cell::num(r.r_sk),
        Cell::num(r.qber),
        strategy(&|s| s.p_u1),
        strategy(&|s| s.p_s(2)),
        strategy(&|s| s.p_s(3)),
        strategy(&|s| s.p_i32),
        Cell::Bool(r.feasible),
    ]
}

pub fn compare(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if let Some(grid) = cfg.visibility_grid {
        let mut table = Table::new(vec!["visibility", "sarg04_qber", "bb84_qber"]);
        for row in visibility_table(&grid.values())? {
            table.push(vec![Cell::num(row.visibility), Cell::num(row.sarg04_qber), Cell::num(row.bb84_qber)]);
        }
        return Ok(Outcome::Table(table));
    }
    let grid = cfg.qber_grid.unwrap_or(DEFAULT_QBER_GRID);
    let mut table = Table::new(vec![
        "qber",
        "sarg04_lower",
        "sarg04_upper",
        "bb84_lower",
        "sarg04_visibility",
        "bb84_visibility",
    ]);
    for row in comparison_table(&grid.values(), &LowerBoundOptions::default())? {
        table.push(vec![
            Cell::num(row.qber),
            Cell::num(row.sarg04_lower),
            Cell::num(row.sarg04_upper),
            Cell::num(row.bb84_lower),
            Cell::num(row.sarg04_visibility),
            Cell::num(row.bb84_visibility),
        ]);
    }
    Ok(Outcome::Table(table))
}
