//! Experiment runner behind the `aorhb` binary.
//!
//! An [`ExperimentConfig`] names a preset (or a custom instance), the solvers
//! to run and where to write results. [`run_experiment`] produces a
//! [`ReportBundle`]: one CSV trace per solver, certificate results, a summary,
//! a metadata record and, for benchmarks and sweeps, gnuplot-ready data.

pub mod config;
pub mod error;
pub mod plot;
pub mod report;
pub mod run;
pub mod trace_csv;

pub use config::{Experiment, ExperimentConfig, Overrides, ProblemClass, Scale, SolverId};
pub use error::{CliError, CliResult};
pub use plot::{emit_plot_data, PlotStyle};
pub use report::{CertificateStatus, ReportBundle, RunReport, SweepReport};
pub use run::{run_experiment, Mode};
pub use trace_csv::{emit_csv, parse_csv, CsvRow, HEADER};
