//! Solver configuration and per-iteration traces.

use std::time::Instant;

use crate::linalg::Vector;

/// Known solution used for error and gap reporting.
///
/// For saddle problems `point` is the concatenation `(u*, p*)` and `value`
/// is unused.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub point: Vector,
    pub value: Option<f64>,
    /// True when the reference was produced by one of this crate's own
    /// solvers rather than by a direct factorization.
    pub self_consistent: bool,
}

impl Reference {
    pub fn exact(point: Vector, value: Option<f64>) -> Self {
        Self { point, value, self_consistent: false }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop once `‖∇f(x_k)‖ ≤ grad_tolerance`; 0 disables the test.
    pub grad_tolerance: f64,
    /// Stop once `‖x_k − x*‖ / ‖x_0 − x*‖` drops to this value (needs a reference).
    pub error_tolerance: Option<f64>,
    pub alpha_override: Option<f64>,
    pub record_every: usize,
    pub seed: u64,
    pub store_iterates: bool,
    /// Evaluate `f(x_k) − f*` at recorded iterations (one extra value call each).
    pub record_objective: bool,
    pub reference: Option<Reference>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            grad_tolerance: 0.0,
            error_tolerance: None,
            alpha_override: None,
            record_every: 1,
            seed: 0,
            store_iterates: false,
            record_objective: true,
            reference: None,
        }
    }
}

impl SolverConfig {
    pub fn new(max_iters: usize) -> Self {
        Self { max_iters, ..Self::default() }
    }

    pub fn with_reference(mut self, reference: Reference) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn with_error_tolerance(mut self, tol: f64) -> Self {
        self.error_tolerance = Some(tol);
        self
    }

    pub fn with_grad_tolerance(mut self, tol: f64) -> Self {
        self.grad_tolerance = tol;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha_override = Some(alpha);
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every.max(1);
        self
    }

    pub fn with_iterates(mut self) -> Self {
        self.store_iterates = true;
        self
    }

    pub fn without_objective(mut self) -> Self {
        self.record_objective = false;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub x: Option<Vector>,
    /// Auxiliary sequence (`y`, `v`, or `(v, q)` for saddle methods).
    pub y: Option<Vector>,
    pub error: Option<f64>,
    /// Error of the auxiliary sequence when it is reported separately.
    pub aux_error: Option<f64>,
    pub obj_gap: Option<f64>,
    pub lyapunov_e: Option<f64>,
    pub lyapunov_ealpha: Option<f64>,
    pub grad_norm: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    ErrorTolerance,
    MaxIterations,
    /// A non-finite iterate appeared; only reported by baselines whose
    /// failure is an expected outcome.
    Diverged { iter: usize },
}

#[derive(Clone, Debug)]
pub struct SolverTrace {
    pub solver: &'static str,
    pub records: Vec<TraceRecord>,
    pub termination: Termination,
    /// Number of iterations performed.
    pub iterations: usize,
    pub gradient_evals: usize,
    pub wall_ms: f64,
    pub alpha: Option<f64>,
    /// Set when convexity-dependent guarantees do not apply (non-convex prox).
    pub heuristic: bool,
    pub x_final: Vector,
    pub aux_final: Option<Vector>,
}

impl SolverTrace {
    /// `‖x_k − x*‖ / ‖x_0 − x*‖` at every recorded iteration.
    pub fn relative_errors(&self) -> Vec<(usize, f64)> {
        let e0 = match self.records.first().and_then(|r| r.error) {
            Some(e) if e > 0.0 => e,
            _ => return Vec::new(),
        };
        self.records.iter().filter_map(|r| r.error.map(|e| (r.k, e / e0))).collect()
    }

    /// First recorded iteration whose relative error is at most `tol`.
    pub fn iterations_to_relative_error(&self, tol: f64) -> Option<usize> {
        self.relative_errors().into_iter().find(|&(_, e)| e <= tol).map(|(k, _)| k)
    }

    pub fn final_relative_error(&self) -> Option<f64> {
        self.relative_errors().last().map(|&(_, e)| e)
    }

    pub fn final_error(&self) -> Option<f64> {
        self.records.iter().rev().find_map(|r| r.error)
    }

    /// `(k, E^α_k)` for every record that carries it.
    pub fn ealpha_series(&self) -> Vec<(usize, f64)> {
        self.records.iter().filter_map(|r| r.lyapunov_ealpha.map(|v| (r.k, v))).collect()
    }

    pub fn e_series(&self) -> Vec<(usize, f64)> {
        self.records.iter().filter_map(|r| r.lyapunov_e.map(|v| (r.k, v))).collect()
    }

    pub fn diverged(&self) -> bool {
        matches!(self.termination, Termination::Diverged { .. })
    }
}

/// Shared bookkeeping for the solver loops.
pub(crate) struct Recorder<'a> {
    pub cfg: &'a SolverConfig,
    start: Instant,
    records: Vec<TraceRecord>,
    e0: Option<f64>,
    /// Optimal value; when unknown, gaps are taken against the best value seen.
    pub f_star: Option<f64>,
}

impl<'a> Recorder<'a> {
    pub fn new(cfg: &'a SolverConfig) -> Self {
        Self { cfg, start: Instant::now(), records: Vec::new(), e0: None, f_star: None }
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.start.elapsed().as_secs_f64() * 1e3
    }

    pub fn due(&self, k: usize) -> bool {
        k.is_multiple_of(self.cfg.record_every.max(1))
    }

    pub fn reference(&self) -> Option<&Reference> {
        self.cfg.reference.as_ref()
    }

    /// Distance to the reference point.
    pub fn error_of(&self, x: &Vector) -> Option<f64> {
        self.reference().filter(|r| r.point.len() == x.len()).map(|r| (x - &r.point).norm())
    }

    /// `f(x) − f*`, or the raw value when `f*` is unknown (fixed up in [`Self::finish`]).
    pub fn gap(&self, fx: f64) -> f64 {
        fx - self.f_star.unwrap_or(0.0)
    }

    /// Records the baseline error of the starting point.
    pub fn set_initial_error(&mut self, e: Option<f64>) {
        self.e0 = e;
    }

    pub fn push(&mut self, mut rec: TraceRecord, x: &Vector, y: Option<&Vector>) {
        if let Some(last) = self.records.last() {
            if last.k >= rec.k {
                return;
            }
        }
        rec.wall_ms = self.elapsed_ms();
        if self.cfg.store_iterates {
            rec.x = Some(x.clone());
            rec.y = y.cloned();
        }
        self.records.push(rec);
    }

    /// Stopping test applied after iterate `k` has been measured.
    pub fn should_stop(&self, grad_norm: Option<f64>, error: Option<f64>) -> Option<Termination> {
        if let (Some(tol), Some(e), Some(e0)) = (self.cfg.error_tolerance, error, self.e0) {
            if e0 == 0.0 || e <= tol * e0 {
                return Some(Termination::ErrorTolerance);
            }
        }
        if let Some(g) = grad_norm {
            if self.cfg.grad_tolerance > 0.0 && g <= self.cfg.grad_tolerance {
                return Some(Termination::GradientTolerance);
            }
        }
        None
    }

    #[allow(clippy::too_many_arguments)]
    pub fn finish(
        self,
        solver: &'static str,
        termination: Termination,
        iterations: usize,
        gradient_evals: usize,
        alpha: Option<f64>,
        x_final: Vector,
        aux_final: Option<Vector>,
    ) -> SolverTrace {
        let wall_ms = self.elapsed_ms();
        let mut records = self.records;
        if self.f_star.is_none() {
            let best = records.iter().filter_map(|r| r.obj_gap).fold(f64::INFINITY, f64::min);
            for r in records.iter_mut() {
                if let Some(v) = r.obj_gap.as_mut() {
                    *v -= best;
                }
            }
        }
        SolverTrace {
            solver,
            records,
            termination,
            iterations,
            gradient_evals,
            wall_ms,
            alpha,
            heuristic: false,
            x_final,
            aux_final,
        }
    }
}
