//! Report bundle: per-run results, sweep results, summary and metadata files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use aorhb_core::solvers::Termination;

use crate::config::{ExperimentConfig, SolverId};
use crate::error::{CliError, CliResult, EXIT_CERTIFICATE, EXIT_OK};

pub const SUMMARY_FILE: &str = "summary.txt";
pub const METADATA_FILE: &str = "metadata.txt";
pub const NON_CONVERGENT_LABEL: &str = "non-convergent baseline";

#[derive(Clone, Debug, PartialEq)]
pub enum CertificateStatus {
    /// The solver has no certificate.
    NotApplicable,
    /// Non-convex regularizer: the run is reported but carries no guarantee.
    Heuristic,
    Skipped(String),
    Passed(String),
    Failed(String),
}

impl CertificateStatus {
    pub fn failed(&self) -> bool {
        matches!(self, CertificateStatus::Failed(_))
    }

    pub fn describe(&self) -> String {
        match self {
            CertificateStatus::NotApplicable => "none".into(),
            CertificateStatus::Heuristic => "none (heuristic: non-convex regularizer)".into(),
            CertificateStatus::Skipped(why) => format!("skipped ({why})"),
            CertificateStatus::Passed(d) => format!("pass ({d})"),
            CertificateStatus::Failed(d) => format!("FAIL ({d})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub solver: SolverId,
    /// Trace file name inside the output directory.
    pub csv: String,
    pub rows: usize,
    pub iterations: usize,
    pub termination: Termination,
    pub alpha: Option<f64>,
    pub final_error: Option<f64>,
    pub final_relative_error: Option<f64>,
    pub wall_ms: f64,
    pub certificate: CertificateStatus,
    pub label: Option<String>,
    /// `(k, ‖x_k − x*‖)` at every record, kept for plot data.
    pub errors: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub solver: SolverId,
    pub kappa: f64,
    /// Iterations to the tolerance; `None` if it was not reached.
    pub iterations: Option<usize>,
    pub certificate: CertificateStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub csv: String,
    pub points: Vec<SweepPoint>,
    /// Fitted log-log slope of iterations against κ, per solver.
    pub slopes: Vec<(SolverId, Option<f64>)>,
}

#[derive(Clone, Debug)]
pub struct ReportBundle {
    pub config: ExperimentConfig,
    pub runs: Vec<RunReport>,
    pub sweep: Option<SweepReport>,
    /// Plot data and script files inside the output directory.
    pub plots: Vec<String>,
    pub warnings: Vec<String>,
    pub reference_self_consistent: bool,
    pub wall_ms: f64,
}

impl ReportBundle {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            config,
            runs: Vec::new(),
            sweep: None,
            plots: Vec::new(),
            warnings: Vec::new(),
            reference_self_consistent: false,
            wall_ms: 0.0,
        }
    }

    pub fn dir(&self) -> &Path {
        &self.config.output_dir
    }

    pub fn certificates(&self) -> impl Iterator<Item = (SolverId, &CertificateStatus)> {
        let runs = self.runs.iter().map(|r| (r.solver, &r.certificate));
        let sweep = self.sweep.iter().flat_map(|s| s.points.iter().map(|p| (p.solver, &p.certificate)));
        runs.chain(sweep)
    }

    pub fn certificates_pass(&self) -> bool {
        !self.certificates().any(|(_, c)| c.failed())
    }

    pub fn exit_code(&self) -> i32 {
        if self.certificates_pass() {
            EXIT_OK
        } else {
            EXIT_CERTIFICATE
        }
    }

    /// Every file the summary refers to.
    pub fn files(&self) -> Vec<String> {
        let mut out: Vec<String> = self.runs.iter().map(|r| r.csv.clone()).collect();
        out.extend(self.sweep.iter().map(|s| s.csv.clone()));
        out.extend(self.plots.iter().cloned());
        out.push(METADATA_FILE.into());
        out
    }

    pub fn summary_text(&self) -> String {
        let cfg = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "experiment = {}", cfg.experiment);
        let _ = writeln!(s, "scale = {}", cfg.scale);
        let _ = writeln!(s, "seed = {}", cfg.seed);
        let _ = writeln!(s, "problem = {}", cfg.instance.kind);
        let _ = writeln!(s, "certificates = {}", if self.certificates_pass() { "pass" } else { "FAIL" });
        if self.reference_self_consistent {
            let _ = writeln!(s, "reference = self-consistent (computed by the library's own solver)");
        }
        let _ = writeln!(s, "metadata = {METADATA_FILE}");
        for r in &self.runs {
            let _ = writeln!(s, "\n[{}]", r.solver);
            let _ = writeln!(s, "csv = {}", r.csv);
            let _ = writeln!(s, "rows = {}", r.rows);
            let _ = writeln!(s, "iterations = {}", r.iterations);
            let _ = writeln!(s, "termination = {}", termination_name(r.termination));
            if let Some(a) = r.alpha {
                let _ = writeln!(s, "alpha = {a:.6e}");
            }
            if let Some(e) = r.final_error {
                let _ = writeln!(s, "final_error = {e:.6e}");
            }
            if let Some(e) = r.final_relative_error {
                let _ = writeln!(s, "final_relative_error = {e:.6e}");
            }
            let _ = writeln!(s, "certificate = {}", r.certificate.describe());
            if let Some(l) = &r.label {
                let _ = writeln!(s, "label = {l}");
            }
        }
        if let Some(sw) = &self.sweep {
            let _ = writeln!(s, "\n[sweep]");
            let _ = writeln!(s, "csv = {}", sw.csv);
            let _ = writeln!(s, "tolerance = {:e}", cfg.tolerance.unwrap_or(0.0));
            for (solver, slope) in &sw.slopes {
                match slope {
                    Some(v) => {
                        let _ = writeln!(s, "slope.{solver} = {v:.4}");
                    }
                    None => {
                        let _ = writeln!(s, "slope.{solver} = n/a (fewer than two sweep points reached the tolerance)");
                    }
                }
            }
        }
        if !self.plots.is_empty() {
            let _ = writeln!(s, "\n[plots]");
            for p in &self.plots {
                let _ = writeln!(s, "file = {p}");
            }
        }
        s
    }

    pub fn metadata_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "aorhb_version = {}", env!("CARGO_PKG_VERSION"));
        for (k, v) in self.config.echo() {
            let _ = writeln!(s, "config.{k} = {v}");
        }
        let _ = writeln!(s, "wall_ms.total = {:.3}", self.wall_ms);
        for r in &self.runs {
            let _ = writeln!(s, "wall_ms.{} = {:.3}", r.solver, r.wall_ms);
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning = {w}");
        }
        s
    }

    /// Writes `summary.txt` and `metadata.txt`; returns the summary path.
    pub fn write(&self) -> CliResult<PathBuf> {
        let meta = self.dir().join(METADATA_FILE);
        std::fs::write(&meta, self.metadata_text()).map_err(|e| CliError::io(&meta, e))?;
        let summary = self.dir().join(SUMMARY_FILE);
        std::fs::write(&summary, self.summary_text()).map_err(|e| CliError::io(&summary, e))?;
        Ok(summary)
    }
}

pub fn termination_name(t: Termination) -> String {
    match t {
        Termination::GradientTolerance => "gradient_tolerance".into(),
        Termination::ErrorTolerance => "error_tolerance".into(),
        Termination::MaxIterations => "max_iterations".into(),
        Termination::Diverged { iter } => format!("diverged at iteration {iter}"),
    }
}
