//! Composite minimization `f + g` with `g` accessed through its prox.

use crate::diagnostics::smooth_lyapunov;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::zoo::CompositeProblem;

use super::{check_dim, check_finite, Recorder, SolverConfig, SolverTrace, Termination, TraceRecord};

fn with_problem_reference(problem: &CompositeProblem, cfg: &SolverConfig) -> SolverConfig {
    let mut cfg = cfg.clone();
    if cfg.reference.is_none() {
        cfg.reference = problem.reference.clone();
    }
    cfg
}

fn objective_value(problem: &CompositeProblem, rec: &Recorder<'_>, x: &Vector) -> Option<f64> {
    if !rec.cfg.record_objective {
        return None;
    }
    problem.objective(x).map(|v| rec.gap(v))
}

fn reference_objective(problem: &CompositeProblem, cfg: &SolverConfig) -> Option<f64> {
    let r = cfg.reference.as_ref()?;
    r.value.or_else(|| problem.objective(&r.point))
}

/// AOR-HB for `f + g`:
/// `x_{k+1} = (x_k + αy_k)/(1+α)`,
/// `z_k = (y_k + αx_{k+1})/(1+α) − λ(2∇f(x_{k+1}) − ∇f(x_k))`,
/// `y_{k+1} = prox_{λg}(z_k)`, with `α = √(μ/L)` and `λ = α/((1+α)μ)`.
///
/// The `y` sequence is the solution sequence: record errors, objective gaps
/// and `x_final` refer to `y`, while `aux_error` tracks `x`. Lyapunov values use
/// `E = D_f(x, x*) + (μ/2)‖y − x*‖²` plus the `α` cross term. A non-convex `g`
/// marks the trace heuristic.
pub fn aor_hb_composite(
    problem: &CompositeProblem,
    x0: &Vector,
    y0: &Vector,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    const NAME: &str = "aor_hb_composite";
    let f = problem.f.as_ref();
    let mu = f.mu();
    if !(mu > 0.0) {
        return Err(Error::InvalidInput(format!("{NAME} needs a strongly convex smooth part (μ > 0)")));
    }
    check_dim(NAME, problem.dim(), &[x0, y0])?;
    let cfg = with_problem_reference(problem, cfg);
    let alpha = cfg.alpha_override.unwrap_or((mu / f.lipschitz()).sqrt());
    let lambda = alpha / ((1.0 + alpha) * mu);
    let mut rec = Recorder::new(&cfg);
    rec.f_star = reference_objective(problem, &cfg);
    rec.set_initial_error(rec.error_of(y0));
    let anchor = cfg
        .reference
        .as_ref()
        .filter(|r| r.point.len() == problem.dim())
        .map(|r| (r.point.clone(), f.gradient(&r.point)));

    let record = |rec: &Recorder<'_>, k: usize, x: &Vector, gx: &Vector, y: &Vector| {
        let mut r = TraceRecord {
            k,
            error: rec.error_of(y),
            aux_error: rec.error_of(x),
            obj_gap: objective_value(problem, rec, y),
            ..Default::default()
        };
        if let Some((xs, gs)) = &anchor {
            let (e, ea) = smooth_lyapunov(f, x, gx, y, xs, gs, alpha);
            r.lyapunov_e = Some(e);
            r.lyapunov_ealpha = Some(ea);
        }
        r
    };

    let mut x = x0.clone();
    let mut y = y0.clone();
    let mut gx = f.gradient(&x);
    let mut evals = 1;
    rec.push(record(&rec, 0, &x, &gx, &y), &y, Some(&x));
    let c = 1.0 / (1.0 + alpha);
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    for k in 1..=cfg.max_iters {
        let x_next = (&x + &y * alpha) * c;
        let g_next = f.gradient(&x_next);
        evals += 1;
        let z = (&y + &x_next * alpha) * c - (&g_next * 2.0 - &gx) * lambda;
        let y_next = problem.g.prox(&z, lambda)?;
        check_finite(NAME, k, &[&x_next, &y_next, &g_next])?;
        let moved = (&y_next - &y).norm() / lambda;
        x = x_next;
        y = y_next;
        gx = g_next;
        iterations = k;
        let stop = rec.should_stop(Some(moved), rec.error_of(&y));
        if rec.due(k) || stop.is_some() {
            rec.push(record(&rec, k, &x, &gx, &y), &y, Some(&x));
        }
        if let Some(t) = stop {
            termination = t;
            break;
        }
    }
    let mut trace = rec.finish(NAME, termination, iterations, evals, Some(alpha), y, Some(x));
    trace.heuristic = !problem.g.is_convex();
    Ok(trace)
}

/// `x_{k+1} = prox_{g/L}(x_k − ∇f(x_k)/L)`.
///
/// The stopping test uses the gradient-mapping norm `L‖x_{k+1} − x_k‖`.
pub fn proximal_gradient(problem: &CompositeProblem, x0: &Vector, cfg: &SolverConfig) -> Result<SolverTrace> {
    const NAME: &str = "proximal_gradient";
    let f = problem.f.as_ref();
    let l = f.lipschitz();
    if !(l > 0.0) {
        return Err(Error::InvalidInput(format!("{NAME} needs L > 0")));
    }
    check_dim(NAME, problem.dim(), &[x0])?;
    let cfg = with_problem_reference(problem, cfg);
    let mut rec = Recorder::new(&cfg);
    rec.f_star = reference_objective(problem, &cfg);
    rec.set_initial_error(rec.error_of(x0));
    let measure = |rec: &Recorder<'_>, k: usize, x: &Vector, gm: Option<f64>| TraceRecord {
        k,
        error: rec.error_of(x),
        obj_gap: objective_value(problem, rec, x),
        grad_norm: gm,
        ..Default::default()
    };
    let mut x = x0.clone();
    rec.push(measure(&rec, 0, &x, None), &x, None);
    let mut evals = 0;
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    for k in 1..=cfg.max_iters {
        let g = f.gradient(&x);
        evals += 1;
        let x_next = problem.g.prox(&(&x - &g / l), 1.0 / l)?;
        check_finite(NAME, k, &[&x_next])?;
        let gm = l * (&x_next - &x).norm();
        x = x_next;
        iterations = k;
        let stop = rec.should_stop(Some(gm), rec.error_of(&x));
        if rec.due(k) || stop.is_some() {
            rec.push(measure(&rec, k, &x, Some(gm)), &x, None);
        }
        if let Some(t) = stop {
            termination = t;
            break;
        }
    }
    let mut trace = rec.finish(NAME, termination, iterations, evals, None, x, None);
    trace.heuristic = !problem.g.is_convex();
    Ok(trace)
}
