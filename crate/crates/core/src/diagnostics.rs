//! Bregman divergences, Lyapunov functions for the three problem classes,
//! per-step decay certificates and empirical rate fits.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::oracle::SmoothOracle;
use crate::solvers::SolverTrace;
use crate::zoo::SaddleProblem;

/// `D_f(y, x) = f(y) − f(x) − ⟨∇f(x), y − x⟩`.
pub fn bregman<O: SmoothOracle + ?Sized>(oracle: &O, y: &Vector, x: &Vector) -> f64 {
    if let Some(d) = oracle.bregman_closed_form(y, x) {
        return d;
    }
    oracle.value(y) - oracle.value(x) - oracle.gradient(x).dot(&(y - x))
}

/// Same as [`bregman`] with `∇f(x)` supplied by the caller.
pub(crate) fn bregman_with_grad<O: SmoothOracle + ?Sized>(oracle: &O, y: &Vector, x: &Vector, gx: &Vector) -> f64 {
    if let Some(d) = oracle.bregman_closed_form(y, x) {
        return d;
    }
    oracle.value(y) - oracle.value(x) - gx.dot(&(y - x))
}

/// `E(x, y) = D_f(x, x*) + (μ/2)‖y − x*‖²`.
pub fn lyapunov_e<O: SmoothOracle + ?Sized>(oracle: &O, x: &Vector, y: &Vector, x_star: &Vector) -> f64 {
    let g_star = oracle.gradient(x_star);
    bregman_with_grad(oracle, x, x_star, &g_star) + 0.5 * oracle.mu() * (y - x_star).norm_squared()
}

/// `E^α = E + α⟨∇f(x) − ∇f(x*), y − x*⟩`.
///
/// For `α ≤ √(μ/L)` the value must lie in `[0, 2E]`; leaving that range
/// (beyond `1e-12·E`) is reported as a certificate-integrity error.
pub fn lyapunov_e_alpha<O: SmoothOracle + ?Sized>(
    oracle: &O,
    x: &Vector,
    y: &Vector,
    x_star: &Vector,
    alpha: f64,
) -> Result<f64> {
    let g_star = oracle.gradient(x_star);
    let gx = oracle.gradient(x);
    let (e, ea) = smooth_lyapunov(oracle, x, &gx, y, x_star, &g_star, alpha);
    let valid_alpha = oracle.mu() > 0.0 && alpha <= (oracle.mu() / oracle.lipschitz()).sqrt() * (1.0 + 1e-12);
    if valid_alpha {
        let tol = 1e-12 * e;
        if ea < -tol || ea > 2.0 * e + tol {
            return Err(Error::CertificateIntegrity(format!(
                "E^α = {ea:e} outside [0, 2E] with E = {e:e} at α = {alpha}"
            )));
        }
    }
    Ok(ea)
}

/// `(E, E^α)` from precomputed gradients; used inside solver loops.
pub(crate) fn smooth_lyapunov<O: SmoothOracle + ?Sized>(
    oracle: &O,
    x: &Vector,
    gx: &Vector,
    y: &Vector,
    x_star: &Vector,
    g_star: &Vector,
    alpha: f64,
) -> (f64, f64) {
    let ey = y - x_star;
    let e = bregman_with_grad(oracle, x, x_star, g_star) + 0.5 * oracle.mu() * ey.norm_squared();
    let cross = (gx - g_star).dot(&ey);
    (e, e + alpha * cross)
}

/// Lyapunov function of the time-rescaled scheme for `μ = 0`:
/// `f(x) − f* + (γ̃/2)‖v − x*‖²`.
pub fn lyapunov_zero<O: SmoothOracle + ?Sized>(
    oracle: &O,
    x: &Vector,
    v: &Vector,
    gamma_tilde: f64,
    x_star: &Vector,
    f_star: f64,
) -> f64 {
    oracle.value(x) - f_star + 0.5 * gamma_tilde * (v - x_star).norm_squared()
}

/// State `(u, v, p, q)` of the saddle methods.
#[derive(Clone, Debug, PartialEq)]
pub struct SaddleState {
    pub u: Vector,
    pub v: Vector,
    pub p: Vector,
    pub q: Vector,
}

impl SaddleState {
    pub fn new(u: Vector, v: Vector, p: Vector, q: Vector) -> Self {
        Self { u, v, p, q }
    }

    /// `(u, u, p, p)`.
    pub fn from_primal_dual(u: Vector, p: Vector) -> Self {
        Self { v: u.clone(), q: p.clone(), u, p }
    }

    pub fn primal(&self) -> Vector {
        crate::flow::concat(&[&self.u, &self.p])
    }

    pub fn auxiliary(&self) -> Vector {
        crate::flow::concat(&[&self.v, &self.q])
    }

    pub fn to_vector(&self) -> Vector {
        crate::flow::concat(&[&self.u, &self.v, &self.p, &self.q])
    }

    pub fn from_vector(z: &Vector, m: usize, n: usize) -> Self {
        Self {
            u: z.rows(0, m).into_owned(),
            v: z.rows(m, m).into_owned(),
            p: z.rows(2 * m, n).into_owned(),
            q: z.rows(2 * m + n, n).into_owned(),
        }
    }
}

/// Gradients at the saddle point, computed once per run.
pub(crate) struct SaddleAnchor<'a> {
    pub u_star: &'a Vector,
    pub p_star: &'a Vector,
    pub gf_star: Vector,
    pub gg_star: Vector,
}

impl<'a> SaddleAnchor<'a> {
    pub fn new(problem: &SaddleProblem, u_star: &'a Vector, p_star: &'a Vector) -> Self {
        Self { u_star, p_star, gf_star: problem.f.gradient(u_star), gg_star: problem.g.gradient(p_star) }
    }
}

/// `(E, E^α)` for a saddle state with gradients at `(u, p)` supplied.
pub(crate) fn saddle_lyapunov_terms(
    problem: &SaddleProblem,
    s: &SaddleState,
    gu: &Vector,
    gp: &Vector,
    anchor: &SaddleAnchor<'_>,
    alpha: f64,
    include_bsym: bool,
) -> (f64, f64) {
    let (f, g) = (&problem.f, &problem.g);
    let dv = &s.v - anchor.u_star;
    let dq = &s.q - anchor.p_star;
    let e = bregman_with_grad(f.as_ref(), &s.u, anchor.u_star, &anchor.gf_star)
        + bregman_with_grad(g.as_ref(), &s.p, anchor.p_star, &anchor.gg_star)
        + 0.5 * f.mu() * dv.norm_squared()
        + 0.5 * g.mu() * dq.norm_squared();
    let mut cross = (gu - &anchor.gf_star).dot(&dv) + (gp - &anchor.gg_star).dot(&dq);
    if include_bsym {
        cross -= (&problem.b * &dv).dot(&dq);
    }
    (e, e + alpha * cross)
}

/// Saddle Lyapunov function
/// `E = D_f(u,u*) + D_g(p,p*) + (μ_f/2)‖v−u*‖² + (μ_g/2)‖q−p*‖²` plus the
/// cross term `α(⟨∇f(u)−∇f(u*), v−u*⟩ + ⟨∇g(p)−∇g(p*), q−p*⟩)` and, when
/// `include_bsym`, the coupling term `−α⟨B(v−u*), q−p*⟩`.
///
/// The coupling coefficient is the one for which the one-step energy identity
/// of the explicit saddle method holds exactly.
pub fn lyapunov_saddle(
    problem: &SaddleProblem,
    s: &SaddleState,
    saddle_ref: (&Vector, &Vector),
    alpha: f64,
    include_bsym: bool,
) -> Result<f64> {
    let anchor = SaddleAnchor::new(problem, saddle_ref.0, saddle_ref.1);
    let gu = problem.f.gradient(&s.u);
    let gp = problem.g.gradient(&s.p);
    let (e, ea) = saddle_lyapunov_terms(problem, s, &gu, &gp, &anchor, alpha, include_bsym);
    if ea < -1e-12 * e {
        return Err(Error::CertificateIntegrity(format!("saddle E^α = {ea:e} negative with E = {e:e}")));
    }
    Ok(ea)
}

/// `−⟨∇E, G(z) − G(z*)⟩ − E − (μ/2)‖x − y‖²` for the AGD flow; nonnegative
/// for every `(x, y)` when `f` is `μ`-strongly convex.
pub fn strong_lyapunov_gap<O: SmoothOracle + ?Sized>(oracle: &O, x: &Vector, y: &Vector, x_star: &Vector) -> f64 {
    let mu = oracle.mu();
    let dg = oracle.gradient(x) - oracle.gradient(x_star);
    let gx_part = y - x;
    let gy_part = x - y - &dg / mu;
    let lhs = -(dg.dot(&gx_part) + mu * (y - x_star).dot(&gy_part));
    lhs - lyapunov_e(oracle, x, y, x_star) - 0.5 * mu * (x - y).norm_squared()
}

/// Composite version: `ξ ∈ ∂g(y)` and `ξ* = −∇f(x*)` enter the `y`
/// component of the vector field.
pub fn composite_strong_lyapunov_gap<O: SmoothOracle + ?Sized>(
    oracle: &O,
    x: &Vector,
    y: &Vector,
    xi: &Vector,
    x_star: &Vector,
) -> f64 {
    let mu = oracle.mu();
    let g_star = oracle.gradient(x_star);
    let dg = oracle.gradient(x) - &g_star;
    let dxi = xi + &g_star;
    let gx_part = y - x;
    let gy_part = x - y - (&dg + &dxi) / mu;
    let lhs = -(dg.dot(&gx_part) + mu * (y - x_star).dot(&gy_part));
    lhs - lyapunov_e(oracle, x, y, x_star) - 0.5 * mu * (x - y).norm_squared()
}

/// Saddle-flow version with the extra `(μ_f/2)‖v−u‖² + (μ_g/2)‖q−p‖²` term.
pub fn saddle_strong_lyapunov_gap(problem: &SaddleProblem, s: &SaddleState, u_star: &Vector, p_star: &Vector) -> f64 {
    let (mf, mg) = (problem.f.mu(), problem.g.mu());
    let dfu = problem.f.gradient(&s.u) - problem.f.gradient(u_star);
    let dgp = problem.g.gradient(&s.p) - problem.g.gradient(p_star);
    let dv = &s.v - u_star;
    let dq = &s.q - p_star;
    let g_u = &s.v - &s.u;
    let g_v = &s.u - &s.v - (&dfu + problem.b.tr_mul(&dq)) / mf;
    let g_p = &s.q - &s.p;
    let g_q = &s.p - &s.q - (&dgp - &problem.b * &dv) / mg;
    let lhs = -(dfu.dot(&g_u) + mf * dv.dot(&g_v) + dgp.dot(&g_p) + mg * dq.dot(&g_q));
    let anchor = SaddleAnchor::new(problem, u_star, p_star);
    let gu = problem.f.gradient(&s.u);
    let gp = problem.g.gradient(&s.p);
    let (e, _) = saddle_lyapunov_terms(problem, s, &gu, &gp, &anchor, 0.0, false);
    lhs - e - 0.5 * mf * (&s.v - &s.u).norm_squared() - 0.5 * mg * (&s.q - &s.p).norm_squared()
}

/// Outcome of checking `E^α_{k+1} ≤ bound · E^α_k` along a trace.
#[derive(Clone, Debug, PartialEq)]
pub struct RateCertificate {
    /// `(k, E^α_{k+1} / E^α_k)` for every checked step.
    pub ratios: Vec<(usize, f64)>,
    pub theoretical_bound: f64,
    pub slack: f64,
    pub violations: Vec<(usize, f64)>,
    /// Per-step contraction factor fitted to `log E^α` after a 10% burn-in.
    pub fitted_rate: f64,
    /// `E^α_0 / α` when the step size is known.
    pub c0: Option<f64>,
}

impl RateCertificate {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn worst_ratio(&self) -> f64 {
        self.ratios.iter().map(|&(_, r)| r).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyOptions {
    /// Relative slack: a step violates when `ratio > bound + slack·(1 + |E^α_k|)`.
    pub slack: f64,
    /// Stop once `E^α_k` has fallen below `floor_rel · E^α_0`, where the
    /// value is dominated by rounding.
    pub floor_rel: f64,
    /// Stop once `|E^α_k|` is below this absolute level, e.g. the rounding
    /// error of a Bregman divergence evaluated from function values.
    pub floor_abs: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { slack: 1e-8, floor_rel: 0.0, floor_abs: 0.0 }
    }
}

/// Checks the per-step decay of the `E^α` values recorded in `trace`.
pub fn certify_decay(trace: &SolverTrace, bound: f64, slack: f64) -> Result<RateCertificate> {
    certify_decay_with(trace, bound, CertifyOptions { slack, ..CertifyOptions::default() })
}

pub fn certify_decay_with(trace: &SolverTrace, bound: f64, opts: CertifyOptions) -> Result<RateCertificate> {
    let mut cert = certify_series(&trace.ealpha_series(), bound, opts)?;
    cert.c0 = trace.alpha.and_then(|a| trace.ealpha_series().first().map(|&(_, v)| v / a));
    Ok(cert)
}

/// Certificate for an arbitrary `(k, value)` sequence with consecutive indices.
pub fn certify_series(series: &[(usize, f64)], bound: f64, opts: CertifyOptions) -> Result<RateCertificate> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 Lyapunov records, got {}",
            series.len()
        )));
    }
    let v0 = series[0].1;
    let mut ratios = Vec::with_capacity(series.len() - 1);
    let mut violations = Vec::new();
    for w in series.windows(2) {
        let ((k, a), (k1, b)) = (w[0], w[1]);
        if k1 != k + 1 {
            return Err(Error::InvalidInput(format!(
                "Lyapunov records must be consecutive (got {k} then {k1}); use record_every = 1"
            )));
        }
        if a.abs() < opts.floor_rel * v0.abs() || a.abs() < opts.floor_abs || a == 0.0 {
            break;
        }
        let ratio = b / a;
        ratios.push((k, ratio));
        if !(ratio <= bound + opts.slack * (1.0 + a.abs())) {
            violations.push((k, ratio));
        }
    }
    let fitted_rate = fit_log_linear_rate(series);
    Ok(RateCertificate { ratios, theoretical_bound: bound, slack: opts.slack, violations, fitted_rate, c0: None })
}

/// `exp` of the least-squares slope of `log value` against `k`, after
/// dropping the first 10% of the sequence; positive values only.
pub fn fit_log_linear_rate(series: &[(usize, f64)]) -> f64 {
    let skip = series.len() / 10;
    let pts: Vec<(f64, f64)> = series[skip..]
        .iter()
        .filter(|(_, v)| *v > 0.0 && v.is_finite())
        .map(|&(k, v)| (k as f64, v.ln()))
        .collect();
    match least_squares_slope(&pts) {
        Some(s) => s.exp(),
        None => f64::NAN,
    }
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Steps where the aggregate bound `E_{k+1} ≤ C_0 q^k` fails, with
/// `C_0 = E^α_0 / α` and `q = 1/(1+α/2)`. `e_series` holds `(k, E_k)`.
pub fn aggregate_bound_violations(e_series: &[(usize, f64)], ealpha0: f64, alpha: f64, slack: f64) -> Vec<(usize, f64)> {
    let c0 = ealpha0 / alpha;
    let q = 1.0 / (1.0 + alpha / 2.0);
    e_series
        .iter()
        .filter(|&&(k, _)| k >= 1)
        .filter_map(|&(k, e)| {
            let bound = c0 * q.powi((k - 1) as i32);
            (e > bound * (1.0 + slack)).then_some((k, e / bound))
        })
        .collect()
}

/// Least-squares slope of `log(iterations)` against `log(kappa)`.
pub fn fit_iteration_scaling(sweep: &[(f64, f64)]) -> Result<f64> {
    if sweep.len() < 2 {
        return Err(Error::InsufficientData("need at least two sweep points".into()));
    }
    for w in sweep.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::InvalidInput("kappa values must be strictly increasing".into()));
        }
    }
    if let Some(p) = sweep.iter().find(|p| !(p.1 > 0.0) || !(p.0 > 0.0)) {
        return Err(Error::InvalidInput(format!("iteration counts and kappa must be positive, got {p:?}")));
    }
    let pts: Vec<(f64, f64)> = sweep.iter().map(|&(k, it)| (k.ln(), it.ln())).collect();
    least_squares_slope(&pts).ok_or_else(|| Error::InsufficientData("degenerate sweep".into()))
}
