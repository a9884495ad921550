//! Fixtures shared by the solver benchmarks.

use aorhb_core::solvers::SolverConfig;
use aorhb_core::zoo::{CompositeProblem, InstanceKind, InstanceSpec, Problem, SaddleProblem, SmoothProblem};

pub const SEED: u64 = 17;

fn build(spec: InstanceSpec) -> Problem {
    spec.build().expect("benchmark instance builds")
}

/// Quadratic with spectrum in `[1, κ]`.
pub fn quadratic(d: usize, kappa: f64) -> SmoothProblem {
    match build(InstanceSpec::new(InstanceKind::Quadratic, &[d], Some(kappa), SEED)) {
        Problem::Smooth(p) => p,
        _ => unreachable!(),
    }
}

/// Regularized logistic regression with `m` samples and `d` features.
pub fn logistic(m: usize, d: usize) -> SmoothProblem {
    match build(InstanceSpec::new(InstanceKind::Logistic, &[m, d], None, SEED).with_param("lambda", 0.1)) {
        Problem::Smooth(p) => p,
        _ => unreachable!(),
    }
}

pub fn lasso(rows: usize, cols: usize) -> CompositeProblem {
    match build(InstanceSpec::new(InstanceKind::Lasso, &[rows, cols], None, SEED).with_param("lambda", 0.8)) {
        Problem::Composite(p) => p,
        _ => unreachable!(),
    }
}

pub fn mspbe(m: usize, n: usize, kappa: f64) -> SaddleProblem {
    match build(InstanceSpec::new(InstanceKind::Mspbe, &[m, n], Some(kappa), SEED)) {
        Problem::Saddle(p) => p,
        _ => unreachable!(),
    }
}

/// A fixed number of steps with a single record at the end, so the timing
/// measures iterations rather than trace bookkeeping.
pub fn fixed_steps(steps: usize) -> SolverConfig {
    let mut cfg = SolverConfig::new(steps).with_record_every(steps);
    cfg.record_objective = false;
    cfg
}
