//! Running presets and sweeps: solver dispatch, certificates and the report bundle.

use std::time::Instant;

use aorhb_core::diagnostics::{certify_decay_with, CertifyOptions, SaddleState};
use aorhb_core::linalg::{gaussian_vector, seeded_rng};
use aorhb_core::solvers::{
    aor_hb, aor_hb_composite, aor_hb_saddle, aor_hb_saddle_implicit, aor_hb_two_var, aor_hb_zero, extragradient,
    gradient_descent, heavy_ball_polyak, nag, proximal_gradient, ImplicitSolveCache, SolverConfig, SolverTrace,
    Termination,
};
use aorhb_core::zoo::{InstanceSpec, Problem};
use aorhb_core::{Error as CoreError, Vector};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, SolverId};
use crate::error::{CliError, CliResult};
use crate::plot::{emit_plot_data, sweep_slope, PlotStyle};
use crate::report::{CertificateStatus, ReportBundle, RunReport, SweepPoint, SweepReport, NON_CONVERGENT_LABEL};
use crate::trace_csv::emit_csv;

/// Salt mixed into the seed for the random starting point of smooth problems.
const START_SALT: u64 = 0x05ee_d0f5_747a;
/// Relative slack of the per-step decay check.
pub const CERTIFICATE_SLACK: f64 = 1e-8;
/// Decay steps are checked while `E^α_k ≥ CERTIFICATE_FLOOR · E^α_0`.
pub const CERTIFICATE_FLOOR: f64 = 1e-20;
/// Default tolerance for sweeps without one.
pub const SWEEP_TOLERANCE: f64 = 1e-6;
pub const SWEEP_CSV: &str = "sweep.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Traces, summary and metadata.
    Solve,
    /// As `Solve`, plus plot data.
    Bench,
    /// Condition-number sweep with a log-log plot.
    Sweep,
    /// As `Solve`, reporting certificates.
    Certify,
}

/// Runs the configured experiment and writes its bundle. Configuration
/// problems are reported before any computation starts.
pub fn run_experiment(config: &ExperimentConfig, mode: Mode) -> CliResult<ReportBundle> {
    config.validate()?;
    if mode == Mode::Sweep && !config.is_sweep() {
        return Err(CliError::Config("sweep needs a list of condition numbers (kappas)".into()));
    }
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let start = Instant::now();
    let mut bundle = ReportBundle::new(config.clone());
    if config.is_sweep() {
        run_sweep(&mut bundle, mode)?;
        if mode != Mode::Certify {
            emit_plot_data(&mut bundle, PlotStyle::LoglogScaling)?;
        }
    } else {
        run_single(&mut bundle)?;
        if mode == Mode::Bench {
            emit_plot_data(&mut bundle, PlotStyle::SemilogError)?;
        }
    }
    bundle.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    bundle.write()?;
    Ok(bundle)
}

fn build(spec: &InstanceSpec) -> CliResult<Problem> {
    spec.build().map_err(|e| match e {
        CoreError::InvalidInput(m) | CoreError::Construction(m) => CliError::Config(m),
        other => CliError::Core(other),
    })
}

fn reference_is_self_consistent(problem: &Problem) -> bool {
    match problem {
        Problem::Smooth(p) => p.reference.as_ref().is_some_and(|r| r.self_consistent),
        Problem::Composite(p) => p.reference.as_ref().is_some_and(|r| r.self_consistent),
        Problem::Saddle(p) => p.reference.as_ref().is_some_and(|r| r.self_consistent),
    }
}

/// Runs `solver` on `problem` from the default starting point.
pub fn run_solver(problem: &Problem, solver: SolverId, cfg: &SolverConfig, seed: u64) -> CliResult<SolverTrace> {
    use SolverId::*;
    let trace = match problem {
        Problem::Smooth(p) => {
            let mut cfg = cfg.clone();
            cfg.reference = p.reference.clone();
            let o = p.oracle.as_ref();
            let x0 = gaussian_vector(o.dim(), &mut seeded_rng(seed ^ START_SALT));
            match solver {
                Gd => gradient_descent(o, &x0, &cfg),
                HeavyBall => heavy_ball_polyak(o, &x0, None, &cfg),
                Nag => nag(o, &x0, None, &cfg),
                AorHb => aor_hb(o, &x0, None, &cfg),
                AorHbTwoVar => aor_hb_two_var(o, &x0, &x0, &cfg),
                AorHbZero => aor_hb_zero(o, &x0, &cfg),
                _ => return Err(mismatch(solver, "smooth")),
            }
        }
        Problem::Composite(p) => {
            let z = Vector::zeros(p.dim());
            match solver {
                AorHbComposite => aor_hb_composite(p, &z, &z, cfg),
                ProximalGradient => proximal_gradient(p, &z, cfg),
                _ => return Err(mismatch(solver, "composite")),
            }
        }
        Problem::Saddle(p) => {
            let s0 = SaddleState::from_primal_dual(Vector::zeros(p.m()), Vector::zeros(p.n()));
            match solver {
                AorHbSaddle => aor_hb_saddle(p, &s0, cfg),
                AorHbSaddleImplicit => aor_hb_saddle_implicit(p, &s0, cfg, &ImplicitSolveCache::for_problem(p)?),
                Extragradient => extragradient(p, &Vector::zeros(p.m() + p.n()), cfg),
                _ => return Err(mismatch(solver, "saddle")),
            }
        }
    };
    Ok(trace?)
}

/// Rounding level of a Lyapunov value built from function values near the
/// solution: `10³·ε·(1 + |f(x*)|)`, summed over the smooth parts.
pub fn lyapunov_noise_floor(problem: &Problem) -> f64 {
    let scale = match problem {
        Problem::Smooth(p) => p.reference.as_ref().map_or(0.0, |r| p.oracle.value(&r.point).abs()),
        Problem::Composite(p) => p.reference.as_ref().map_or(0.0, |r| p.f.value(&r.point).abs()),
        Problem::Saddle(p) => {
            p.reference.as_ref().map_or(0.0, |r| p.f.value(&r.u).abs() + p.g.value(&r.p).abs())
        }
    };
    1e3 * f64::EPSILON * (1.0 + scale)
}

fn mismatch(solver: SolverId, class: &str) -> CliError {
    CliError::Config(format!("solver {solver} cannot run on a {class} problem"))
}

fn solver_config(config: &ExperimentConfig, record_every: usize) -> SolverConfig {
    let mut cfg = SolverConfig::new(config.max_iters).with_record_every(record_every);
    cfg.error_tolerance = config.tolerance;
    cfg.seed = config.seed;
    cfg
}

/// Per-step `E^α` decay for the AOR-HB family and the `O(1/k²)` bound for
/// the `μ = 0` variant; other solvers carry no certificate.
///
/// `noise` is an absolute level below which `E^α` values are treated as
/// rounding noise and no longer checked; see [`lyapunov_noise_floor`].
pub fn certify(solver: SolverId, trace: &SolverTrace, record_every: usize, noise: f64) -> CertificateStatus {
    use SolverId::*;
    match solver {
        AorHbTwoVar | AorHbComposite | AorHbSaddle | AorHbSaddleImplicit => {
            if trace.heuristic {
                return CertificateStatus::Heuristic;
            }
            if record_every != 1 {
                return CertificateStatus::Skipped("needs record_every = 1".into());
            }
            let Some(alpha) = trace.alpha else {
                return CertificateStatus::Skipped("step size unknown".into());
            };
            let bound = 1.0 / (1.0 + alpha / 2.0);
            let opts = CertifyOptions { slack: CERTIFICATE_SLACK, floor_rel: CERTIFICATE_FLOOR, floor_abs: noise };
            match certify_decay_with(trace, bound, opts) {
                Ok(c) if c.passes() => CertificateStatus::Passed(format!(
                    "worst E^α ratio {:.8} ≤ {:.8} over {} steps",
                    c.worst_ratio(),
                    bound,
                    c.ratios.len()
                )),
                Ok(c) => CertificateStatus::Failed(format!(
                    "{} of {} steps exceed the bound {:.8}, first at k = {}",
                    c.violations.len(),
                    c.ratios.len(),
                    bound,
                    c.violations[0].0
                )),
                Err(e) => CertificateStatus::Skipped(e.to_string()),
            }
        }
        AorHbZero => certify_sublinear(trace),
        _ => CertificateStatus::NotApplicable,
    }
}

/// `f(x_k) − f* ≤ 6E_1/((k+3)(k+2))` at every record, with slack `10⁻⁹E_1`.
fn certify_sublinear(trace: &SolverTrace) -> CertificateStatus {
    let e0 = match trace.records.first() {
        Some(r) if r.k == 1 => match r.lyapunov_e {
            Some(e) => e,
            None => return CertificateStatus::Skipped("no reference solution".into()),
        },
        _ => return CertificateStatus::Skipped("first record is not k = 1".into()),
    };
    let mut violations = Vec::new();
    let mut checked = 0;
    for r in &trace.records {
        let Some(gap) = r.obj_gap else { continue };
        let k = r.k as f64;
        checked += 1;
        if gap > 6.0 * e0 / ((k + 3.0) * (k + 2.0)) + 1e-9 * e0 {
            violations.push(r.k);
        }
    }
    if violations.is_empty() {
        CertificateStatus::Passed(format!("objective gap within 6E_1/((k+3)(k+2)) at {checked} records"))
    } else {
        CertificateStatus::Failed(format!("{} records exceed the bound, first at k = {}", violations.len(), violations[0]))
    }
}

fn run_single(bundle: &mut ReportBundle) -> CliResult<()> {
    let config = bundle.config.clone();
    let problem = build(&config.instance)?;
    bundle.reference_self_consistent = reference_is_self_consistent(&problem);
    let cfg = solver_config(&config, config.record_every);
    let noise = lyapunov_noise_floor(&problem);
    let runs: Vec<CliResult<RunReport>> = config
        .solvers
        .par_iter()
        .map(|&solver| {
            log::info!("running {solver}");
            let trace = run_solver(&problem, solver, &cfg, config.seed)?;
            let csv = format!("{solver}.csv");
            let rows = emit_csv(&trace, &config.output_dir.join(&csv), config.wall_time)?;
            let errors = trace.records.iter().filter_map(|r| r.error.map(|e| (r.k, e))).collect();
            Ok(RunReport {
                solver,
                csv,
                rows,
                iterations: trace.iterations,
                termination: trace.termination,
                alpha: trace.alpha,
                final_error: trace.final_error(),
                final_relative_error: trace.final_relative_error(),
                wall_ms: trace.wall_ms,
                certificate: certify(solver, &trace, config.record_every, noise),
                label: None,
                errors,
            })
        })
        .collect();
    bundle.runs = runs.into_iter().collect::<CliResult<_>>()?;
    label_baselines(&mut bundle.runs);
    Ok(())
}

/// Marks heavy-ball runs whose final error exceeds ten times the best final
/// error, and any run that diverged.
fn label_baselines(runs: &mut [RunReport]) {
    let best = runs.iter().filter_map(|r| r.final_relative_error).filter(|e| e.is_finite()).fold(f64::INFINITY, f64::min);
    for r in runs.iter_mut() {
        if matches!(r.termination, Termination::Diverged { .. }) {
            r.label = Some("diverged".into());
        } else if r.solver == SolverId::HeavyBall {
            if let Some(e) = r.final_relative_error {
                if best.is_finite() && e > 10.0 * best {
                    r.label = Some(NON_CONVERGENT_LABEL.into());
                }
            }
        }
    }
}

fn run_sweep(bundle: &mut ReportBundle, mode: Mode) -> CliResult<()> {
    let config = bundle.config.clone();
    let tol = config.tolerance.unwrap_or(SWEEP_TOLERANCE);
    let record_every = if mode == Mode::Certify { config.record_every } else { config.max_iters };
    let mut cfg = solver_config(&config, record_every);
    cfg.error_tolerance = Some(tol);
    let problems: Vec<(f64, Problem)> = config
        .kappas
        .par_iter()
        .map(|&kappa| {
            let mut spec = config.instance.clone();
            spec.kappa = Some(kappa);
            build(&spec).map(|p| (kappa, p))
        })
        .collect::<CliResult<_>>()?;
    bundle.reference_self_consistent = problems.iter().any(|(_, p)| reference_is_self_consistent(p));
    let jobs: Vec<(SolverId, usize)> =
        config.solvers.iter().flat_map(|&s| (0..problems.len()).map(move |i| (s, i))).collect();
    let points: Vec<SweepPoint> = jobs
        .par_iter()
        .map(|&(solver, i)| {
            let (kappa, problem) = &problems[i];
            log::info!("sweep: {solver} at kappa {kappa:e}");
            let trace = run_solver(problem, solver, &cfg, config.seed)?;
            let reached = trace.termination == Termination::ErrorTolerance;
            let certificate =
                if mode == Mode::Certify {
                    certify(solver, &trace, record_every, lyapunov_noise_floor(problem))
                } else {
                    CertificateStatus::NotApplicable
                };
            Ok(SweepPoint { solver, kappa: *kappa, iterations: reached.then_some(trace.iterations), certificate })
        })
        .collect::<CliResult<_>>()?;
    let slopes = config
        .solvers
        .iter()
        .map(|&s| {
            let pts: Vec<(f64, usize)> =
                points.iter().filter(|p| p.solver == s).filter_map(|p| p.iterations.map(|it| (p.kappa, it))).collect();
            (s, sweep_slope(&pts))
        })
        .collect();
    write_sweep_csv(&config, &points)?;
    bundle.sweep = Some(SweepReport { csv: SWEEP_CSV.into(), points, slopes });
    Ok(())
}

fn write_sweep_csv(config: &ExperimentConfig, points: &[SweepPoint]) -> CliResult<()> {
    let path = config.output_dir.join(SWEEP_CSV);
    let wrap = |source| CliError::Csv { path: path.clone(), source };
    let mut w = csv::Writer::from_path(&path).map_err(wrap)?;
    w.write_record(["solver", "kappa", "iterations", "reached"]).map_err(wrap)?;
    for p in points {
        w.write_record([
            p.solver.to_string(),
            format!("{:?}", p.kappa),
            p.iterations.map(|i| i.to_string()).unwrap_or_default(),
            p.iterations.is_some().to_string(),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Experiment, Scale};

    fn custom(dir: &std::path::Path, solvers: Vec<SolverId>) -> ExperimentConfig {
        let mut c = ExperimentConfig::preset(Experiment::Custom, Scale::Desk, 3);
        c.output_dir = dir.to_path_buf();
        c.solvers = solvers;
        c.instance.dims = vec![10];
        c.max_iters = 200;
        c
    }

    #[test]
    fn single_run_writes_referenced_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = custom(dir.path(), vec![SolverId::AorHbTwoVar, SolverId::Gd]);
        let b = run_experiment(&cfg, Mode::Bench).unwrap();
        for f in b.files() {
            assert!(dir.path().join(&f).exists(), "{f} missing");
        }
        assert_eq!(b.runs[0].rows, b.runs[0].iterations + 1);
        assert!(matches!(b.runs[0].certificate, CertificateStatus::Passed(_)));
        assert_eq!(b.runs[1].certificate, CertificateStatus::NotApplicable);
        assert_eq!(b.exit_code(), 0);
    }

    #[test]
    fn sweep_requires_kappas() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = custom(dir.path(), vec![SolverId::Gd]);
        assert!(matches!(run_experiment(&cfg, Mode::Sweep), Err(CliError::Config(_))));
    }

    #[test]
    fn quadratic_sweep_reports_slopes() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = custom(dir.path(), vec![SolverId::AorHbTwoVar, SolverId::Gd]);
        cfg.kappas = vec![1e1, 1e2, 1e3];
        cfg.max_iters = 100_000;
        let b = run_experiment(&cfg, Mode::Sweep).unwrap();
        let slopes = &b.sweep.as_ref().unwrap().slopes;
        let gd = slopes.iter().find(|s| s.0 == SolverId::Gd).unwrap().1.unwrap();
        let aor = slopes.iter().find(|s| s.0 == SolverId::AorHbTwoVar).unwrap().1.unwrap();
        assert!(aor < gd);
        assert!(dir.path().join("loglog_scaling.gp").exists());
    }

    #[test]
    fn heavy_ball_far_behind_is_labelled() {
        let mk = |solver, e| RunReport {
            solver,
            csv: String::new(),
            rows: 1,
            iterations: 0,
            termination: Termination::MaxIterations,
            alpha: None,
            final_error: None,
            final_relative_error: Some(e),
            wall_ms: 0.0,
            certificate: CertificateStatus::NotApplicable,
            label: None,
            errors: vec![],
        };
        let mut runs = vec![mk(SolverId::AorHb, 1e-12), mk(SolverId::HeavyBall, 1e-6), mk(SolverId::Gd, 1e-3)];
        label_baselines(&mut runs);
        assert_eq!(runs[1].label.as_deref(), Some(NON_CONVERGENT_LABEL));
        assert_eq!(runs[2].label, None);
    }
}
