//! Smooth minimization: AOR-HB in its three-term and two-variable forms, the
//! time-rescaled variant for `μ = 0`, and the GD / heavy-ball / NAG baselines.

use crate::diagnostics::smooth_lyapunov;
use crate::error::{Error, Result};
use crate::linalg::{all_finite, Vector};
use crate::oracle::SmoothOracle;

use super::{check_dim, check_finite, reference_value, Recorder, SolverConfig, SolverTrace, Termination, TraceRecord};

fn require_strong_convexity<O: SmoothOracle + ?Sized>(oracle: &O, solver: &str) -> Result<()> {
    if oracle.mu() > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{solver} needs μ > 0; use aor_hb_zero when μ = 0")))
    }
}

/// `(γ, β) = (1/(√L+√μ)², L/(√L+√μ)²)`, or the equivalent pair for an
/// explicit `α`: `β = 1/(1+α)²`, `γ = α²/(μ(1+α)²)`.
pub fn aor_hb_parameters(mu: f64, l: f64, alpha: Option<f64>) -> (f64, f64) {
    match alpha {
        Some(a) => {
            let s = (1.0 + a) * (1.0 + a);
            (a * a / (mu * s), 1.0 / s)
        }
        None => {
            let s = (l.sqrt() + mu.sqrt()).powi(2);
            (1.0 / s, l / s)
        }
    }
}

/// Polyak's `(γ, β) = (4/(√L+√μ)², ((√L−√μ)/(√L+√μ))²)`.
pub fn polyak_parameters(mu: f64, l: f64) -> (f64, f64) {
    let (sl, sm) = (l.sqrt(), mu.sqrt());
    (4.0 / (sl + sm).powi(2), ((sl - sm) / (sl + sm)).powi(2))
}

/// Measurements shared by the single-sequence methods.
fn measure<O: SmoothOracle + ?Sized>(
    oracle: &O,
    rec: &Recorder<'_>,
    k: usize,
    x: &Vector,
    grad_norm: Option<f64>,
) -> TraceRecord {
    let obj_gap = rec.cfg.record_objective.then(|| rec.gap(oracle.value(x)));
    TraceRecord { k, error: rec.error_of(x), obj_gap, grad_norm, ..Default::default() }
}

fn start<'a, O: SmoothOracle + ?Sized>(oracle: &O, cfg: &'a SolverConfig, x0: &Vector) -> Recorder<'a> {
    let mut rec = Recorder::new(cfg);
    rec.f_star = reference_value(oracle, cfg);
    rec.set_initial_error(rec.error_of(x0));
    rec
}

/// AOR-HB, three-term form:
/// `x_{k+1} = x_k − γ(2∇f(x_k) − ∇f(x_{k−1})) + β(x_k − x_{k−1})`.
///
/// `x1` defaults to `x0`. Records are indexed by iterate subscript, so a run
/// of `max_iters` steps ends at `x_{max_iters+1}`. One gradient per step.
pub fn aor_hb<O: SmoothOracle + ?Sized>(
    oracle: &O,
    x0: &Vector,
    x1: Option<&Vector>,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    const NAME: &str = "aor_hb";
    require_strong_convexity(oracle, NAME)?;
    let x1 = x1.unwrap_or(x0);
    check_dim(NAME, oracle.dim(), &[x0, x1])?;
    let (gamma, beta) = aor_hb_parameters(oracle.mu(), oracle.lipschitz(), cfg.alpha_override);
    let alpha = cfg.alpha_override.unwrap_or((oracle.mu() / oracle.lipschitz()).sqrt());
    let mut rec = start(oracle, cfg, x0);

    let mut x_prev = x0.clone();
    let mut g_prev = oracle.gradient(x0);
    let mut evals = 1;
    let (mut x, mut g) = if x1 == x0 {
        (x1.clone(), g_prev.clone())
    } else {
        evals += 1;
        (x1.clone(), oracle.gradient(x1))
    };
    rec.push(measure(oracle, &rec, 0, &x_prev, Some(g_prev.norm())), &x_prev, None);
    rec.push(measure(oracle, &rec, 1, &x, Some(g.norm())), &x, None);

    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    for step in 1..=cfg.max_iters {
        let k = step + 1;
        let x_next = &x - (&g * 2.0 - &g_prev) * gamma + (&x - &x_prev) * beta;
        let g_next = oracle.gradient(&x_next);
        evals += 1;
        check_finite(NAME, k, &[&x_next, &g_next])?;
        x_prev = std::mem::replace(&mut x, x_next);
        g_prev = std::mem::replace(&mut g, g_next);
        iterations = step;
        let gn = g.norm();
        let err = rec.error_of(&x);
        if rec.due(k) {
            rec.push(measure(oracle, &rec, k, &x, Some(gn)), &x, None);
        }
        if let Some(t) = rec.should_stop(Some(gn), err) {
            rec.push(measure(oracle, &rec, k, &x, Some(gn)), &x, None);
            termination = t;
            break;
        }
    }
    Ok(rec.finish(NAME, termination, iterations, evals, Some(alpha), x, None))
}

/// AOR-HB, two-variable form:
/// `x_{k+1} = (x_k + αy_k)/(1+α)`,
/// `y_{k+1} = (y_k + αx_{k+1} − (α/μ)(2∇f(x_{k+1}) − ∇f(x_k)))/(1+α)`.
///
/// With a reference point the trace carries `E` and `E^α` at every record.
pub fn aor_hb_two_var<O: SmoothOracle + ?Sized>(
    oracle: &O,
    x0: &Vector,
    y0: &Vector,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    const NAME: &str = "aor_hb_two_var";
    require_strong_convexity(oracle, NAME)?;
    check_dim(NAME, oracle.dim(), &[x0, y0])?;
    let mu = oracle.mu();
    let alpha = cfg.alpha_override.unwrap_or((mu / oracle.lipschitz()).sqrt());
    let mut rec = start(oracle, cfg, x0);
    let anchor = cfg
        .reference
        .as_ref()
        .filter(|r| r.point.len() == oracle.dim())
        .map(|r| (r.point.clone(), oracle.gradient(&r.point)));

    let record = |rec: &Recorder<'_>, k: usize, x: &Vector, gx: &Vector, y: &Vector| {
        let mut r = measure(oracle, rec, k, x, Some(gx.norm()));
        r.aux_error = rec.error_of(y);
        if let Some((xs, gs)) = &anchor {
            let (e, ea) = smooth_lyapunov(oracle, x, gx, y, xs, gs, alpha);
            r.lyapunov_e = Some(e);
            r.lyapunov_ealpha = Some(ea);
        }
        r
    };

    let mut x = x0.clone();
    let mut y = y0.clone();
    let mut gx = oracle.gradient(&x);
    let mut evals = 1;
    rec.push(record(&rec, 0, &x, &gx, &y), &x, Some(&y));

    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    let c = 1.0 / (1.0 + alpha);
    for k in 1..=cfg.max_iters {
        let x_next = (&x + &y * alpha) * c;
        let g_next = oracle.gradient(&x_next);
        evals += 1;
        y = (&y + &x_next * alpha - (&g_next * 2.0 - &gx) * (alpha / mu)) * c;
        check_finite(NAME, k, &[&x_next, &y, &g_next])?;
        x = x_next;
        gx = g_next;
        iterations = k;
        let gn = gx.norm();
        let err = rec.error_of(&x);
        let stop = rec.should_stop(Some(gn), err);
        if rec.due(k) || stop.is_some() {
            rec.push(record(&rec, k, &x, &gx, &y), &x, Some(&y));
        }
        if let Some(t) = stop {
            termination = t;
            break;
        }
    }
    Ok(rec.finish(NAME, termination, iterations, evals, Some(alpha), x, Some(y)))
}

/// Time-rescaled AOR-HB for `μ ≥ 0`:
/// `x_{k+1} = x_k − c_k(1/L)(2∇f(x_k) − ∇f(x_{k−1})) + c_k(x_k − x_{k−1})`,
/// `c_k = k/(k+3)`, starting at `k = 1` with `x_1 = x_0`.
///
/// Records are indexed from `k = 1`. With a reference `(x*, f*)` each record
/// carries `E_k = f(x_k) − f* + (γ̃_k/2)‖v_k − x*‖²`, where
/// `α_k = 2/(k+1)`, `β_k = 1/(α_k L)`, `γ̃_k = ((k+1)/k)α_k²L`,
/// `y_k = ((1+α_k)x_{k+1} − x_k)/α_k` and `v_k = y_k + β_k∇f(x_k)`.
/// `E_k` needs `x_{k+1}`, so the last record has none.
pub fn aor_hb_zero<O: SmoothOracle + ?Sized>(oracle: &O, x0: &Vector, cfg: &SolverConfig) -> Result<SolverTrace> {
    const NAME: &str = "aor_hb_zero";
    let l = oracle.lipschitz();
    if !(l > 0.0) {
        return Err(Error::InvalidInput(format!("{NAME} needs L > 0")));
    }
    check_dim(NAME, oracle.dim(), &[x0])?;
    let mut rec = start(oracle, cfg, x0);
    let x_star = cfg.reference.as_ref().filter(|r| r.point.len() == oracle.dim()).map(|r| r.point.clone());

    let mut x_prev = x0.clone();
    let mut x = x0.clone();
    let mut g = oracle.gradient(x0);
    let mut g_prev = g.clone();
    let mut evals = 1;
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    for k in 1..=cfg.max_iters {
        let kf = k as f64;
        let c = kf / (kf + 3.0);
        let x_next = &x - (&g * 2.0 - &g_prev) * (c / l) + (&x - &x_prev) * c;
        check_finite(NAME, k + 1, &[&x_next])?;
        let gn = g.norm();
        let err = rec.error_of(&x);
        let stop = rec.should_stop(Some(gn), err);
        if rec.due(k) || stop.is_some() {
            let mut r = measure(oracle, &rec, k, &x, Some(gn));
            if let (Some(xs), Some(f_star)) = (&x_star, rec.f_star) {
                let a = 2.0 / (kf + 1.0);
                let beta = 1.0 / (a * l);
                let gamma_tilde = (kf + 1.0) / kf * a * a * l;
                let y = ((&x_next * (1.0 + a)) - &x) / a;
                let v = y + &g * beta;
                r.lyapunov_e = Some(oracle.value(&x) - f_star + 0.5 * gamma_tilde * (v - xs).norm_squared());
            }
            rec.push(r, &x, None);
        }
        if let Some(t) = stop {
            termination = t;
            break;
        }
        let g_next = oracle.gradient(&x_next);
        evals += 1;
        check_finite(NAME, k + 1, &[&g_next])?;
        x_prev = std::mem::replace(&mut x, x_next);
        g_prev = std::mem::replace(&mut g, g_next);
        iterations = k;
    }
    if termination == Termination::MaxIterations {
        let k = iterations + 1;
        rec.push(measure(oracle, &rec, k, &x, Some(g.norm())), &x, None);
    }
    Ok(rec.finish(NAME, termination, iterations, evals, None, x, None))
}

/// `x_{k+1} = x_k − ∇f(x_k)/L`.
pub fn gradient_descent<O: SmoothOracle + ?Sized>(oracle: &O, x0: &Vector, cfg: &SolverConfig) -> Result<SolverTrace> {
    const NAME: &str = "gd";
    let l = oracle.lipschitz();
    if !(l > 0.0) {
        return Err(Error::InvalidInput(format!("{NAME} needs L > 0")));
    }
    check_dim(NAME, oracle.dim(), &[x0])?;
    let mut rec = start(oracle, cfg, x0);
    let mut x = x0.clone();
    let mut g = oracle.gradient(&x);
    let mut evals = 1;
    rec.push(measure(oracle, &rec, 0, &x, Some(g.norm())), &x, None);
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    for k in 1..=cfg.max_iters {
        x -= &g / l;
        g = oracle.gradient(&x);
        evals += 1;
        check_finite(NAME, k, &[&x, &g])?;
        iterations = k;
        let gn = g.norm();
        let stop = rec.should_stop(Some(gn), rec.error_of(&x));
        if rec.due(k) || stop.is_some() {
            rec.push(measure(oracle, &rec, k, &x, Some(gn)), &x, None);
        }
        if let Some(t) = stop {
            termination = t;
            break;
        }
    }
    Ok(rec.finish(NAME, termination, iterations, evals, None, x, None))
}

/// Polyak's heavy ball `x_{k+1} = x_k − γ∇f(x_k) + β(x_k − x_{k−1})`.
///
/// Non-convergence is an outcome here, not an error: a non-finite iterate
/// ends the run with [`Termination::Diverged`] and the last finite point.
pub fn heavy_ball_polyak<O: SmoothOracle + ?Sized>(
    oracle: &O,
    x0: &Vector,
    x1: Option<&Vector>,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    const NAME: &str = "heavy_ball";
    require_strong_convexity(oracle, NAME)?;
    let x1 = x1.unwrap_or(x0);
    check_dim(NAME, oracle.dim(), &[x0, x1])?;
    let (gamma, beta) = polyak_parameters(oracle.mu(), oracle.lipschitz());
    let mut rec = start(oracle, cfg, x0);
    let mut x_prev = x0.clone();
    let mut x = x1.clone();
    let mut g = oracle.gradient(&x);
    let mut evals = 1;
    rec.push(measure(oracle, &rec, 0, &x_prev, None), &x_prev, None);
    rec.push(measure(oracle, &rec, 1, &x, Some(g.norm())), &x, None);
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    for step in 1..=cfg.max_iters {
        let k = step + 1;
        let x_next = &x - &g * gamma + (&x - &x_prev) * beta;
        let g_next = oracle.gradient(&x_next);
        evals += 1;
        if !(all_finite(&x_next) && all_finite(&g_next)) {
            termination = Termination::Diverged { iter: k };
            break;
        }
        x_prev = std::mem::replace(&mut x, x_next);
        g = g_next;
        iterations = step;
        let gn = g.norm();
        let stop = rec.should_stop(Some(gn), rec.error_of(&x));
        if rec.due(k) || stop.is_some() {
            rec.push(measure(oracle, &rec, k, &x, Some(gn)), &x, None);
        }
        if let Some(t) = stop {
            termination = t;
            break;
        }
    }
    Ok(rec.finish(NAME, termination, iterations, evals, None, x, None))
}

/// Nesterov's method with constant momentum `β = (√L−√μ)/(√L+√μ)` and step `1/L`:
/// `w_k = x_k + β(x_k − x_{k−1})`, `x_{k+1} = w_k − ∇f(w_k)/L`.
///
/// The recorded gradient norm is the one at the extrapolated point.
pub fn nag<O: SmoothOracle + ?Sized>(
    oracle: &O,
    x0: &Vector,
    x1: Option<&Vector>,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    const NAME: &str = "nag";
    require_strong_convexity(oracle, NAME)?;
    let x1 = x1.unwrap_or(x0);
    check_dim(NAME, oracle.dim(), &[x0, x1])?;
    let (sl, sm) = (oracle.lipschitz().sqrt(), oracle.mu().sqrt());
    let beta = (sl - sm) / (sl + sm);
    let step = 1.0 / oracle.lipschitz();
    let mut rec = start(oracle, cfg, x0);
    let mut x_prev = x0.clone();
    let mut x = x1.clone();
    rec.push(measure(oracle, &rec, 0, &x_prev, None), &x_prev, None);
    rec.push(measure(oracle, &rec, 1, &x, None), &x, None);
    let mut evals = 0;
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    for s in 1..=cfg.max_iters {
        let k = s + 1;
        let w = &x + (&x - &x_prev) * beta;
        let gw = oracle.gradient(&w);
        evals += 1;
        let x_next = &w - &gw * step;
        check_finite(NAME, k, &[&x_next, &gw])?;
        x_prev = std::mem::replace(&mut x, x_next);
        iterations = s;
        let gn = gw.norm();
        let stop = rec.should_stop(Some(gn), rec.error_of(&x));
        if rec.due(k) || stop.is_some() {
            rec.push(measure(oracle, &rec, k, &x, Some(gn)), &x, None);
        }
        if let Some(t) = stop {
            termination = t;
            break;
        }
    }
    Ok(rec.finish(NAME, termination, iterations, evals, None, x, None))
}
