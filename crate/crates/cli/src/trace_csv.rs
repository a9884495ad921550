//! Per-solver CSV traces.

use std::path::Path;

use aorhb_core::solvers::SolverTrace;

use crate::error::{CliError, CliResult};

pub const HEADER: [&str; 6] = ["iter", "error", "obj_gap", "lyapunov_E", "lyapunov_Ealpha", "wall_ms"];

/// One parsed CSV row; empty fields become `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub iter: usize,
    pub error: Option<f64>,
    pub obj_gap: Option<f64>,
    pub lyapunov_e: Option<f64>,
    pub lyapunov_ealpha: Option<f64>,
    pub wall_ms: Option<f64>,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn field(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// Writes one row per recorded iteration. `wall_ms` is left empty unless
/// `include_wall` is set. Returns the number of data rows.
pub fn emit_csv(trace: &SolverTrace, path: &Path, include_wall: bool) -> CliResult<usize> {
    if trace.records.is_empty() {
        return Err(CliError::Config(format!("{}: trace of {} has no records", path.display(), trace.solver)));
    }
    let wrap = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(HEADER).map_err(wrap)?;
    for r in &trace.records {
        w.write_record([
            r.k.to_string(),
            field(r.error),
            field(r.obj_gap),
            field(r.lyapunov_e),
            field(r.lyapunov_ealpha),
            if include_wall { format_float(r.wall_ms) } else { String::new() },
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(trace.records.len())
}

pub fn parse_csv(path: &Path) -> CliResult<Vec<CsvRow>> {
    let wrap = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(wrap)?;
    let header = r.headers().map_err(wrap)?.clone();
    if header.iter().ne(HEADER) {
        return Err(CliError::Config(format!("{}: unexpected header {:?}", path.display(), header)));
    }
    let bad = |line: usize, s: &str| CliError::Config(format!("{}: bad number '{s}' on row {line}", path.display()));
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(wrap)?;
        let num = |j: usize| -> CliResult<Option<f64>> {
            match rec.get(j).unwrap_or("") {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad(i + 1, s)),
            }
        };
        let iter_field = rec.get(0).unwrap_or("");
        rows.push(CsvRow {
            iter: iter_field.parse().map_err(|_| bad(i + 1, iter_field))?,
            error: num(1)?,
            obj_gap: num(2)?,
            lyapunov_e: num(3)?,
            lyapunov_ealpha: num(4)?,
            wall_ms: num(5)?,
        });
    }
    Ok(rows)
}
