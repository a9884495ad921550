//! First-order solvers for the three problem classes.

pub mod composite;
pub mod saddle;
pub mod smooth;
mod trace;

pub use composite::{aor_hb_composite, proximal_gradient};
pub use saddle::{
    aor_hb_saddle, aor_hb_saddle_implicit, extragradient, extragradient_with_step, saddle_step_size, ImplicitSolveCache,
    InnerSolver, SaddleStepSize, StepBounds, EXTRAGRADIENT_STEP,
};
pub use smooth::{aor_hb, aor_hb_parameters, aor_hb_two_var, aor_hb_zero, gradient_descent, heavy_ball_polyak, nag, polyak_parameters};
pub use trace::{Reference, SolverConfig, SolverTrace, Termination, TraceRecord};

pub(crate) use trace::Recorder;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, Vector};
use crate::oracle::SmoothOracle;

/// `f*` from the configured reference, evaluating `f(x*)` if only the point is known.
pub(crate) fn reference_value<O: SmoothOracle + ?Sized>(oracle: &O, cfg: &SolverConfig) -> Option<f64> {
    let r = cfg.reference.as_ref()?;
    if r.point.len() != oracle.dim() {
        return None;
    }
    Some(r.value.unwrap_or_else(|| oracle.value(&r.point)))
}

pub(crate) fn check_finite(solver: &'static str, iter: usize, parts: &[&Vector]) -> Result<()> {
    if parts.iter().all(|v| all_finite(v)) {
        Ok(())
    } else {
        Err(Error::Divergence { solver, iter })
    }
}

pub(crate) fn check_dim(solver: &'static str, expected: usize, parts: &[&Vector]) -> Result<()> {
    match parts.iter().find(|v| v.len() != expected) {
        Some(v) => Err(Error::InvalidInput(format!("{solver}: expected dimension {expected}, got {}", v.len()))),
        None => Ok(()),
    }
}
