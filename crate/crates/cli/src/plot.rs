//! Gnuplot-ready data files and script stubs.

use std::fmt::Write as _;
use std::path::PathBuf;

use aorhb_core::diagnostics::fit_iteration_scaling;

use crate::error::{CliError, CliResult};
use crate::report::ReportBundle;

/// Non-positive values are replaced by this before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotStyle {
    /// `log10(error)` against the iteration counter, one block per solver.
    SemilogError,
    /// `log10(iterations)` against `log10(κ)` from a sweep, one block per solver.
    LoglogScaling,
}

impl PlotStyle {
    fn stem(self) -> &'static str {
        match self {
            PlotStyle::SemilogError => "semilog_error",
            PlotStyle::LoglogScaling => "loglog_scaling",
        }
    }
}

/// `log10(v)`, clamping non-positive values to [`LOG_FLOOR`]; the flag reports a clamp.
fn clamped_log10(v: f64) -> (f64, bool) {
    if v > 0.0 {
        (v.log10(), false)
    } else {
        (LOG_FLOOR.log10(), true)
    }
}

/// Writes `<style>.dat` and `<style>.gp` into the bundle directory, registers
/// both with the bundle and returns the data path.
pub fn emit_plot_data(bundle: &mut ReportBundle, style: PlotStyle) -> CliResult<PathBuf> {
    let blocks = match style {
        PlotStyle::SemilogError => semilog_blocks(bundle),
        PlotStyle::LoglogScaling => loglog_blocks(bundle)?,
    };
    let stem = style.stem();
    let mut data = String::new();
    let mut script = String::new();
    let _ = writeln!(script, "# gnuplot script stub for {stem}.dat");
    match style {
        PlotStyle::SemilogError => {
            let _ = writeln!(script, "set xlabel \"iteration\"\nset ylabel \"log10 error\"");
        }
        PlotStyle::LoglogScaling => {
            let _ = writeln!(script, "set xlabel \"log10 kappa\"\nset ylabel \"log10 iterations\"");
        }
    }
    let mut plot_terms = Vec::new();
    for (i, block) in blocks.iter().enumerate() {
        if i > 0 {
            data.push_str("\n\n");
        }
        let _ = writeln!(data, "# solver {}", block.name);
        let _ = writeln!(data, "# {} {}", block.columns.0, block.columns.1);
        for &(x, y) in &block.points {
            let _ = writeln!(data, "{x} {y}");
        }
        if let Some(slope) = block.slope {
            let _ = writeln!(script, "# slope {} = {slope:.4}", block.name);
            let _ = writeln!(
                script,
                "set label {} \"{} slope {slope:.2}\" at graph 0.05, graph {:.2}",
                i + 1,
                block.name,
                0.95 - 0.06 * i as f64
            );
        }
        plot_terms.push(format!("\"{stem}.dat\" index {i} with linespoints title \"{}\"", block.name));
    }
    if plot_terms.is_empty() {
        let _ = writeln!(script, "# no data");
    } else {
        let _ = writeln!(script, "plot {}", plot_terms.join(", \\\n     "));
    }

    let dat = bundle.dir().join(format!("{stem}.dat"));
    std::fs::write(&dat, data).map_err(|e| CliError::io(&dat, e))?;
    let gp = bundle.dir().join(format!("{stem}.gp"));
    std::fs::write(&gp, script).map_err(|e| CliError::io(&gp, e))?;
    for name in [format!("{stem}.dat"), format!("{stem}.gp")] {
        if !bundle.plots.contains(&name) {
            bundle.plots.push(name);
        }
    }
    for b in &blocks {
        if b.clamped > 0 {
            let w = format!("{stem}: {} non-positive values of {} clamped to {LOG_FLOOR:e}", b.clamped, b.name);
            log::warn!("{w}");
            bundle.warnings.push(w);
        }
    }
    Ok(dat)
}

struct Block {
    name: String,
    columns: (&'static str, &'static str),
    points: Vec<(f64, f64)>,
    slope: Option<f64>,
    clamped: usize,
}

fn semilog_blocks(bundle: &mut ReportBundle) -> Vec<Block> {
    let mut out = Vec::new();
    for r in &bundle.runs {
        if r.errors.is_empty() {
            bundle.warnings.push(format!("semilog_error: {} has no error values (no reference point)", r.solver));
            continue;
        }
        let mut clamped = 0;
        let points = r
            .errors
            .iter()
            .map(|&(k, e)| {
                let (y, c) = clamped_log10(e);
                clamped += c as usize;
                (k as f64, y)
            })
            .collect();
        out.push(Block { name: r.solver.to_string(), columns: ("iter", "log10_error"), points, slope: None, clamped });
    }
    out
}

fn loglog_blocks(bundle: &ReportBundle) -> CliResult<Vec<Block>> {
    let sweep = bundle
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("log-log scaling plot needs a condition-number sweep".into()))?;
    let mut out = Vec::new();
    for &(solver, slope) in &sweep.slopes {
        let mut clamped = 0;
        let points = sweep
            .points
            .iter()
            .filter(|p| p.solver == solver)
            .filter_map(|p| p.iterations.map(|it| (p.kappa, it as f64)))
            .map(|(k, it)| {
                let (x, c1) = clamped_log10(k);
                let (y, c2) = clamped_log10(it);
                clamped += c1 as usize + c2 as usize;
                (x, y)
            })
            .collect();
        out.push(Block { name: solver.to_string(), columns: ("log10_kappa", "log10_iterations"), points, slope, clamped });
    }
    Ok(out)
}

/// Slope of `log(iterations)` against `log(κ)` over the points that reached the tolerance.
pub fn sweep_slope(points: &[(f64, usize)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(k, it)| (k, it as f64)).collect();
    fit_iteration_scaling(&pts).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Experiment, ExperimentConfig, Scale, SolverId};
    use crate::report::{CertificateStatus, RunReport, SweepPoint, SweepReport};
    use aorhb_core::solvers::Termination;

    fn bundle(dir: &std::path::Path) -> ReportBundle {
        let mut cfg = ExperimentConfig::preset(Experiment::Custom, Scale::Desk, 0);
        cfg.output_dir = dir.to_path_buf();
        ReportBundle::new(cfg)
    }

    fn run(errors: Vec<(usize, f64)>) -> RunReport {
        RunReport {
            solver: SolverId::AorHb,
            csv: "aor_hb.csv".into(),
            rows: errors.len(),
            iterations: errors.len().saturating_sub(1),
            termination: Termination::MaxIterations,
            alpha: None,
            final_error: None,
            final_relative_error: None,
            wall_ms: 0.0,
            certificate: CertificateStatus::NotApplicable,
            label: None,
            errors,
        }
    }

    fn data_rows(text: &str) -> Vec<(f64, f64)> {
        text.lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|l| {
                let mut it = l.split_whitespace().map(|v| v.parse::<f64>().unwrap());
                (it.next().unwrap(), it.next().unwrap())
            })
            .collect()
    }

    #[test]
    fn semilog_takes_log10_of_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = bundle(dir.path());
        b.runs.push(run(vec![(0, 1.0), (1, 0.1), (2, 0.01)]));
        let path = emit_plot_data(&mut b, PlotStyle::SemilogError).unwrap();
        let rows = data_rows(&std::fs::read_to_string(path).unwrap());
        let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
        for (y, want) in ys.iter().zip([0.0, -1.0, -2.0]) {
            assert!((y - want).abs() < 1e-15);
        }
        assert!(dir.path().join("semilog_error.gp").exists());
        assert!(b.warnings.is_empty());
    }

    #[test]
    fn zero_errors_are_clamped_with_a_warning() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = bundle(dir.path());
        b.runs.push(run(vec![(0, 1.0), (1, 0.0)]));
        let path = emit_plot_data(&mut b, PlotStyle::SemilogError).unwrap();
        let rows = data_rows(&std::fs::read_to_string(path).unwrap());
        assert_eq!(rows[1].1, -300.0);
        assert_eq!(b.warnings.len(), 1);
    }

    #[test]
    fn loglog_annotates_slope() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = bundle(dir.path());
        let pts = [(100.0, 10), (10000.0, 100)];
        let slope = sweep_slope(&pts);
        assert!((slope.unwrap() - 0.5).abs() < 1e-12);
        b.sweep = Some(SweepReport {
            csv: "sweep.csv".into(),
            points: pts
                .iter()
                .map(|&(kappa, it)| SweepPoint {
                    solver: SolverId::AorHbSaddle,
                    kappa,
                    iterations: Some(it),
                    certificate: CertificateStatus::NotApplicable,
                })
                .collect(),
            slopes: vec![(SolverId::AorHbSaddle, slope)],
        });
        let path = emit_plot_data(&mut b, PlotStyle::LoglogScaling).unwrap();
        let rows = data_rows(&std::fs::read_to_string(path).unwrap());
        assert_eq!(rows, vec![(2.0, 1.0), (4.0, 2.0)]);
        let script = std::fs::read_to_string(dir.path().join("loglog_scaling.gp")).unwrap();
        assert!(script.contains("# slope aor_hb_saddle = 0.5000"));
    }

    #[test]
    fn loglog_without_sweep_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = bundle(dir.path());
        assert!(emit_plot_data(&mut b, PlotStyle::LoglogScaling).is_err());
    }
}
