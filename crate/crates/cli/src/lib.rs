//! Experiment runner: config parsing, sweeps over the core routines, and
//! self-auditing JSON/CSV reports.

pub mod config;
pub mod experiments;
pub mod report;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

pub use config::{ExperimentConfig, ExperimentKind, Format, Overrides};
pub use report::ReportRow;

pub const WORKERS_ENV: &str = "LSILAB_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serialize(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Worker count from `LSILAB_WORKERS`, then the config, then the machine.
pub fn resolve_workers(cfg: &ExperimentConfig, env: Option<&str>) -> Result<usize, CliError> {
    if let Some(s) = env {
        return match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got `{s}`"))),
        };
    }
    Ok(cfg.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
}

/// Runs every grid point and audits each instance. Rows come out in grid
/// order whatever the worker count.
pub fn run(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<ReportRow>, CliError> {
    let units = experiments::units(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| CliError::Pool(e.to_string()))?;
    let per_unit: Vec<Vec<ReportRow>> = pool.install(|| units.par_iter().map(|u| experiments::run_unit(cfg, u)).collect());
    let mut rows: Vec<ReportRow> = per_unit.into_iter().flatten().collect();
    if cfg.experiment != ExperimentKind::FormulaTable {
        audit_by_instance(&mut rows, cfg.overrides.audit_tolerance);
    } else {
        for r in &mut rows {
            r.pass = r.error.as_ref().map(|_| false);
        }
    }
    Ok(rows)
}

/// Audits each run of consecutive rows sharing an instance key.
pub fn audit_by_instance(rows: &mut [ReportRow], tol: f64) {
    let mut start = 0;
    while start < rows.len() {
        let end = start + rows[start..].iter().take_while(|r| r.instance == rows[start].instance).count();
        report::audit(&mut rows[start..end], tol);
        start = end;
    }
}

pub fn all_pass(rows: &[ReportRow]) -> bool {
    rows.iter().all(|r| r.pass != Some(false))
}

pub fn emit<W: Write>(rows: &[ReportRow], format: Format, out: W) -> Result<(), CliError> {
    match format {
        Format::Json => report::write_json(rows, out),
        Format::Csv => report::write_csv(rows, out),
    }
}

pub fn emit_to_path(rows: &[ReportRow], format: Format, path: &Path) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let mut w = BufWriter::new(file);
    emit(rows, format, &mut w)?;
    w.flush()?;
    Ok(())
}
