//! Bilinearly coupled saddle problems `min_u max_p f(u) − g(p) + ⟨Bu, p⟩`.

use nalgebra::{Cholesky, Dyn};

use crate::diagnostics::{saddle_lyapunov_terms, SaddleAnchor, SaddleState};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, Matrix, Vector};
use crate::zoo::SaddleProblem;

use super::{check_finite, Recorder, SolverConfig, SolverTrace, Termination, TraceRecord};

/// Relative residual the block solve of the implicit method must reach.
pub const BLOCK_RESIDUAL_TOL: f64 = 1e-10;
/// Default step constant `c` of the extragradient baseline (step `c/L_A`).
pub const EXTRAGRADIENT_STEP: f64 = 0.25;

/// The three quantities the saddle step size is built from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepBounds {
    /// `√(μ_f/L_f)`.
    pub primal: f64,
    /// `√(μ_g/L_g)`.
    pub dual: f64,
    /// `√(μ_fμ_g)/‖B‖`, infinite without coupling.
    pub coupling: f64,
}

impl StepBounds {
    pub fn min(&self) -> f64 {
        self.primal.min(self.dual).min(self.coupling)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaddleStepSize {
    pub alpha: f64,
    pub beta_star: f64,
    pub components: StepBounds,
    /// `(√2 − 1)·min(bounds)`, the simpler admissible choice.
    pub alpha_simple: f64,
}

/// `α = max_{β∈(0,1)} min(√β·s, (1−β)c)` with `s = min(√(μ_f/L_f), √(μ_g/L_g))`
/// and `c = √(μ_fμ_g)/‖B‖`.
///
/// The maximizer balances the two terms: with `t = √β`, `ct² + st − c = 0`,
/// so `t = (−s + √(s² + 4c²))/(2c)` and `α = ts`.
pub fn saddle_step_size(mu_f: f64, l_f: f64, mu_g: f64, l_g: f64, b_norm: f64) -> Result<SaddleStepSize> {
    let valid = mu_f > 0.0 && mu_g > 0.0 && mu_f <= l_f && mu_g <= l_g && b_norm >= 0.0 && b_norm.is_finite();
    if !valid {
        return Err(Error::InvalidInput(format!(
            "step size needs 0 < μ ≤ L and ‖B‖ ≥ 0 (μ_f={mu_f}, L_f={l_f}, μ_g={mu_g}, L_g={l_g}, ‖B‖={b_norm})"
        )));
    }
    let primal = (mu_f / l_f).sqrt();
    let dual = (mu_g / l_g).sqrt();
    let s = primal.min(dual);
    let (coupling, t) = if b_norm == 0.0 {
        (f64::INFINITY, 1.0)
    } else {
        let c = (mu_f * mu_g).sqrt() / b_norm;
        (c, (-s + (s * s + 4.0 * c * c).sqrt()) / (2.0 * c))
    };
    let components = StepBounds { primal, dual, coupling };
    Ok(SaddleStepSize {
        alpha: t * s,
        beta_star: t * t,
        components,
        alpha_simple: (2f64.sqrt() - 1.0) * components.min(),
    })
}

fn with_problem_reference(problem: &SaddleProblem, cfg: &SolverConfig) -> SolverConfig {
    let mut cfg = cfg.clone();
    if cfg.reference.is_none() {
        cfg.reference = problem.reference.as_ref().map(|r| r.as_reference());
    }
    cfg
}

fn check_state(problem: &SaddleProblem, s: &SaddleState) -> Result<()> {
    let (m, n) = (problem.m(), problem.n());
    if s.u.len() != m || s.v.len() != m || s.p.len() != n || s.q.len() != n {
        return Err(Error::InvalidInput(format!("saddle state does not match dimensions m={m}, n={n}")));
    }
    Ok(())
}

/// Shared recording for the two AOR-HB saddle methods.
struct SaddleMonitor {
    reference: Option<(Vector, Vector)>,
    alpha: f64,
    include_bsym: bool,
}

impl SaddleMonitor {
    fn new(problem: &SaddleProblem, cfg: &SolverConfig, alpha: f64, include_bsym: bool) -> Self {
        let m = problem.m();
        let reference = cfg
            .reference
            .as_ref()
            .filter(|r| r.point.len() == m + problem.n())
            .map(|r| (r.point.rows(0, m).into_owned(), r.point.rows(m, problem.n()).into_owned()));
        Self { reference, alpha, include_bsym }
    }

    fn record(
        &self,
        problem: &SaddleProblem,
        rec: &Recorder<'_>,
        k: usize,
        s: &SaddleState,
        gu: &Vector,
        gp: &Vector,
    ) -> TraceRecord {
        let primal = s.primal();
        let residual = {
            let a = gu + problem.b.tr_mul(&s.p);
            let b = gp - &problem.b * &s.u;
            (a.norm_squared() + b.norm_squared()).sqrt()
        };
        let mut r = TraceRecord {
            k,
            error: rec.error_of(&primal),
            aux_error: rec.error_of(&s.auxiliary()),
            grad_norm: Some(residual),
            ..Default::default()
        };
        if let Some((us, ps)) = &self.reference {
            let anchor = SaddleAnchor::new(problem, us, ps);
            let (e, ea) = saddle_lyapunov_terms(problem, s, gu, gp, &anchor, self.alpha, self.include_bsym);
            r.lyapunov_e = Some(e);
            r.lyapunov_ealpha = Some(ea);
        }
        r
    }
}

/// AOR-HB for saddle problems:
/// `u_{k+1} = (u_k + αv_k)/(1+α)`, `p_{k+1} = (p_k + αq_k)/(1+α)`,
/// `v_{k+1} = [v_k + αu_{k+1} − (α/μ_f)(2∇f(u_{k+1}) − ∇f(u_k) + Bᵀq_k)]/(1+α)`,
/// `q_{k+1} = [q_k + αp_{k+1} − (α/μ_g)(2∇g(p_{k+1}) − ∇g(p_k) − B(2v_{k+1} − v_k))]/(1+α)`.
///
/// `α` comes from [`saddle_step_size`] unless overridden. Errors and the
/// stopping test refer to `(u, p)`; Lyapunov values include the coupling term.
/// The recorded gradient norm is `‖F(u, p)‖`.
pub fn aor_hb_saddle(problem: &SaddleProblem, s0: &SaddleState, cfg: &SolverConfig) -> Result<SolverTrace> {
    const NAME: &str = "aor_hb_saddle";
    check_state(problem, s0)?;
    let (f, g, b) = (problem.f.as_ref(), problem.g.as_ref(), &problem.b);
    let (mu_f, mu_g) = (f.mu(), g.mu());
    let alpha = match cfg.alpha_override {
        Some(a) => a,
        None => saddle_step_size(mu_f, f.lipschitz(), mu_g, g.lipschitz(), problem.b_norm)?.alpha,
    };
    let cfg = with_problem_reference(problem, cfg);
    let monitor = SaddleMonitor::new(problem, &cfg, alpha, true);
    let mut rec = Recorder::new(&cfg);
    rec.set_initial_error(rec.error_of(&s0.primal()));

    let mut s = s0.clone();
    let mut gu = f.gradient(&s.u);
    let mut gp = g.gradient(&s.p);
    let mut evals = 2;
    rec.push(monitor.record(problem, &rec, 0, &s, &gu, &gp), &s.primal(), Some(&s.auxiliary()));

    let c = 1.0 / (1.0 + alpha);
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    for k in 1..=cfg.max_iters {
        let u1 = (&s.u + &s.v * alpha) * c;
        let p1 = (&s.p + &s.q * alpha) * c;
        let gu1 = f.gradient(&u1);
        let gp1 = g.gradient(&p1);
        evals += 2;
        let v1 = (&s.v + &u1 * alpha - (&gu1 * 2.0 - &gu + b.tr_mul(&s.q)) * (alpha / mu_f)) * c;
        let q1 = (&s.q + &p1 * alpha - (&gp1 * 2.0 - &gp - b * (&v1 * 2.0 - &s.v)) * (alpha / mu_g)) * c;
        check_finite(NAME, k, &[&u1, &p1, &v1, &q1])?;
        s = SaddleState::new(u1, v1, p1, q1);
        gu = gu1;
        gp = gp1;
        iterations = k;
        let stop = rec.should_stop(None, rec.error_of(&s.primal()));
        if rec.due(k) || stop.is_some() || cfg.grad_tolerance > 0.0 {
            let r = monitor.record(problem, &rec, k, &s, &gu, &gp);
            let stop = stop.or_else(|| rec.should_stop(r.grad_norm, None));
            if rec.due(k) || stop.is_some() {
                rec.push(r, &s.primal(), Some(&s.auxiliary()));
            }
            if let Some(t) = stop {
                termination = t;
                break;
            }
        }
    }
    Ok(rec.finish(NAME, termination, iterations, evals, Some(alpha), s.primal(), Some(s.auxiliary())))
}

/// Inner solver for the coupled `(v, q)` system of the implicit method.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InnerSolver {
    /// Cached Cholesky factor of the Schur complement.
    Cholesky,
    /// Conjugate gradients on the Schur complement to a relative tolerance.
    ConjugateGradient { tol: f64, max_iters: usize },
}

/// Which block the Schur complement eliminates onto.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchurSide {
    /// System in `v` (dimension `m`), matrix `(1+α)²I + cBᵀB`.
    Primal,
    /// System in `q` (dimension `n`), matrix `(1+α)²I + cBBᵀ`.
    Dual,
}

/// Factorized Schur complement `(1+α)²I + (α²/(μ_fμ_g))·(BBᵀ or BᵀB)` on the
/// smaller of the two dimensions.
#[derive(Clone, Debug)]
pub struct ImplicitSolveCache {
    pub alpha: f64,
    pub side: SchurSide,
    pub inner: InnerSolver,
    schur: Matrix,
    factor: Option<Cholesky<f64, Dyn>>,
    mu_f: f64,
    mu_g: f64,
}

impl ImplicitSolveCache {
    /// Cache for the default step `α = min(√(μ_f/L_f), √(μ_g/L_g))`.
    pub fn for_problem(problem: &SaddleProblem) -> Result<Self> {
        let alpha = (problem.f.mu() / problem.f.lipschitz()).sqrt().min((problem.g.mu() / problem.g.lipschitz()).sqrt());
        Self::new(problem, alpha, InnerSolver::Cholesky)
    }

    pub fn new(problem: &SaddleProblem, alpha: f64, inner: InnerSolver) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("implicit step needs α > 0, got {alpha}")));
        }
        let (mu_f, mu_g) = (problem.f.mu(), problem.g.mu());
        let coeff = alpha * alpha / (mu_f * mu_g);
        let d = (1.0 + alpha) * (1.0 + alpha);
        let b = &problem.b;
        let (side, gram) = if problem.n() <= problem.m() {
            (SchurSide::Dual, b * b.transpose())
        } else {
            (SchurSide::Primal, b.transpose() * b)
        };
        let dim = gram.nrows();
        let schur = gram * coeff + Matrix::identity(dim, dim) * d;
        let factor = match inner {
            InnerSolver::Cholesky => Some(Cholesky::new(schur.clone()).ok_or_else(|| {
                Error::Construction("Schur complement is numerically indefinite; cannot factor".into())
            })?),
            InnerSolver::ConjugateGradient { .. } => None,
        };
        Ok(Self { alpha, side, inner, schur, factor, mu_f, mu_g })
    }

    /// Dimension of the factored system.
    pub fn dimension_solved(&self) -> usize {
        self.schur.nrows()
    }

    pub fn schur_matrix(&self) -> &Matrix {
        &self.schur
    }

    fn solve_schur(&self, rhs: &Vector) -> Result<Vector> {
        match (self.inner, &self.factor) {
            (InnerSolver::Cholesky, Some(ch)) => Ok(ch.solve(rhs)),
            (InnerSolver::ConjugateGradient { tol, max_iters }, _) => conjugate_gradient(&self.schur, rhs, tol, max_iters),
            (InnerSolver::Cholesky, None) => Err(Error::Construction("missing Cholesky factor".into())),
        }
    }

    /// Solves `(1+α)v + (α/μ_f)Bᵀq = rv`, `−(α/μ_g)Bv + (1+α)q = rq` and checks
    /// the block residual.
    pub fn solve_block(&self, b: &Matrix, rv: &Vector, rq: &Vector) -> Result<(Vector, Vector)> {
        let a = self.alpha;
        let (kf, kg) = (a / self.mu_f, a / self.mu_g);
        let (v, q) = match self.side {
            SchurSide::Dual => {
                let q = self.solve_schur(&(rq * (1.0 + a) + b * rv * kg))?;
                let v = (rv - b.tr_mul(&q) * kf) / (1.0 + a);
                (v, q)
            }
            SchurSide::Primal => {
                let v = self.solve_schur(&(rv * (1.0 + a) - b.tr_mul(rq) * kf))?;
                let q = (rq + b * &v * kg) / (1.0 + a);
                (v, q)
            }
        };
        let res_v = &v * (1.0 + a) + b.tr_mul(&q) * kf - rv;
        let res_q = &q * (1.0 + a) - b * &v * kg - rq;
        let residual = (res_v.norm_squared() + res_q.norm_squared()).sqrt();
        let scale = (rv.norm_squared() + rq.norm_squared()).sqrt().max(f64::MIN_POSITIVE);
        let tolerance = match self.inner {
            InnerSolver::Cholesky => BLOCK_RESIDUAL_TOL,
            InnerSolver::ConjugateGradient { tol, .. } => BLOCK_RESIDUAL_TOL.max(100.0 * tol),
        };
        if residual > tolerance * scale || !residual.is_finite() {
            return Err(Error::Solve { residual: residual / scale, tolerance });
        }
        Ok((v, q))
    }
}

/// Plain conjugate gradients for a symmetric positive definite matrix.
fn conjugate_gradient(a: &Matrix, rhs: &Vector, tol: f64, max_iters: usize) -> Result<Vector> {
    let mut x = Vector::zeros(rhs.len());
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = r.norm_squared();
    let target = tol * rhs.norm();
    for _ in 0..max_iters {
        if rr.sqrt() <= target {
            return Ok(x);
        }
        let ap = a * &p;
        let step = rr / p.dot(&ap);
        x += &p * step;
        r -= &ap * step;
        let rr_new = r.norm_squared();
        p = &r + &p * (rr_new / rr);
        rr = rr_new;
    }
    if rr.sqrt() <= target {
        Ok(x)
    } else {
        Err(Error::Solve { residual: rr.sqrt() / rhs.norm().max(f64::MIN_POSITIVE), tolerance: tol })
    }
}

/// AOR-HB with the coupling treated implicitly: `(u, p)` as in
/// [`aor_hb_saddle`], then `(v_{k+1}, q_{k+1})` from the block system
/// `(1+α)v + (α/μ_f)Bᵀq = v_k + αu_{k+1} − (α/μ_f)(2∇f(u_{k+1}) − ∇f(u_k))`,
/// `(1+α)q − (α/μ_g)Bv = q_k + αp_{k+1} − (α/μ_g)(2∇g(p_{k+1}) − ∇g(p_k))`,
/// solved through `cache`. Lyapunov values omit the coupling term.
pub fn aor_hb_saddle_implicit(
    problem: &SaddleProblem,
    s0: &SaddleState,
    cfg: &SolverConfig,
    cache: &ImplicitSolveCache,
) -> Result<SolverTrace> {
    const NAME: &str = "aor_hb_saddle_implicit";
    check_state(problem, s0)?;
    let expected = if problem.n() <= problem.m() { problem.n() } else { problem.m() };
    if cache.dimension_solved() != expected {
        return Err(Error::InvalidInput("implicit solve cache was built for a different problem".into()));
    }
    let (f, g, b) = (problem.f.as_ref(), problem.g.as_ref(), &problem.b);
    let (mu_f, mu_g) = (f.mu(), g.mu());
    let alpha = cache.alpha;
    let cfg = with_problem_reference(problem, cfg);
    let monitor = SaddleMonitor::new(problem, &cfg, alpha, false);
    let mut rec = Recorder::new(&cfg);
    rec.set_initial_error(rec.error_of(&s0.primal()));

    let mut s = s0.clone();
    let mut gu = f.gradient(&s.u);
    let mut gp = g.gradient(&s.p);
    let mut evals = 2;
    rec.push(monitor.record(problem, &rec, 0, &s, &gu, &gp), &s.primal(), Some(&s.auxiliary()));

    let c = 1.0 / (1.0 + alpha);
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    for k in 1..=cfg.max_iters {
        let u1 = (&s.u + &s.v * alpha) * c;
        let p1 = (&s.p + &s.q * alpha) * c;
        let gu1 = f.gradient(&u1);
        let gp1 = g.gradient(&p1);
        evals += 2;
        let rv = &s.v + &u1 * alpha - (&gu1 * 2.0 - &gu) * (alpha / mu_f);
        let rq = &s.q + &p1 * alpha - (&gp1 * 2.0 - &gp) * (alpha / mu_g);
        check_finite(NAME, k, &[&u1, &p1, &rv, &rq])?;
        let (v1, q1) = cache.solve_block(b, &rv, &rq)?;
        s = SaddleState::new(u1, v1, p1, q1);
        gu = gu1;
        gp = gp1;
        iterations = k;
        let stop = rec.should_stop(None, rec.error_of(&s.primal()));
        if rec.due(k) || stop.is_some() || cfg.grad_tolerance > 0.0 {
            let r = monitor.record(problem, &rec, k, &s, &gu, &gp);
            let stop = stop.or_else(|| rec.should_stop(r.grad_norm, None));
            if rec.due(k) || stop.is_some() {
                rec.push(r, &s.primal(), Some(&s.auxiliary()));
            }
            if let Some(t) = stop {
                termination = t;
                break;
            }
        }
    }
    Ok(rec.finish(NAME, termination, iterations, evals, Some(alpha), s.primal(), Some(s.auxiliary())))
}

/// Optimistic gradient on `F(u, p) = (∇f(u) + Bᵀp, ∇g(p) − Bu)`:
/// `z_{k+1} = z_k − s(2F(z_k) − F(z_{k−1}))` with `s = c/L_A`,
/// `L_A = max(L_f, L_g) + ‖B‖` and `c` = [`EXTRAGRADIENT_STEP`].
pub fn extragradient(problem: &SaddleProblem, z0: &Vector, cfg: &SolverConfig) -> Result<SolverTrace> {
    extragradient_with_step(problem, z0, cfg, EXTRAGRADIENT_STEP)
}

/// [`extragradient`] with an explicit step constant `c`. A non-finite iterate
/// ends the run with [`Termination::Diverged`].
pub fn extragradient_with_step(problem: &SaddleProblem, z0: &Vector, cfg: &SolverConfig, c: f64) -> Result<SolverTrace> {
    const NAME: &str = "extragradient";
    let (m, n) = (problem.m(), problem.n());
    if z0.len() != m + n {
        return Err(Error::InvalidInput(format!("{NAME}: expected a point of dimension {}, got {}", m + n, z0.len())));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidInput(format!("{NAME}: step constant must be positive, got {c}")));
    }
    let l_a = problem.f.lipschitz().max(problem.g.lipschitz()) + problem.b_norm;
    let step = c / l_a;
    let cfg = with_problem_reference(problem, cfg);
    let mut rec = Recorder::new(&cfg);
    rec.set_initial_error(rec.error_of(z0));

    let mut z = z0.clone();
    let mut fz = problem.operator_stacked(&z);
    let mut f_prev = fz.clone();
    let mut evals = 2;
    let measure = |rec: &Recorder<'_>, k: usize, z: &Vector, fz: &Vector| TraceRecord {
        k,
        error: rec.error_of(z),
        grad_norm: Some(fz.norm()),
        ..Default::default()
    };
    rec.push(measure(&rec, 0, &z, &fz), &z, None);
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    for k in 1..=cfg.max_iters {
        let z_next = &z - (&fz * 2.0 - &f_prev) * step;
        let f_next = problem.operator_stacked(&z_next);
        evals += 2;
        if !(all_finite(&z_next) && all_finite(&f_next)) {
            termination = Termination::Diverged { iter: k };
            break;
        }
        z = z_next;
        f_prev = std::mem::replace(&mut fz, f_next);
        iterations = k;
        let stop = rec.should_stop(Some(fz.norm()), rec.error_of(&z));
        if rec.due(k) || stop.is_some() {
            rec.push(measure(&rec, k, &z, &fz), &z, None);
        }
        if let Some(t) = stop {
            termination = t;
            break;
        }
    }
    Ok(rec.finish(NAME, termination, iterations, evals, Some(step), z, None))
}
