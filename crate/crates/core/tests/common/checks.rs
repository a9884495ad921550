//! Worst-case measurements behind the property criteria. Each function
//! returns the worst value seen so callers can compare against a tolerance.

use aorhb_core::diagnostics::{
    bregman, composite_strong_lyapunov_gap, lyapunov_e, lyapunov_e_alpha, saddle_strong_lyapunov_gap,
    strong_lyapunov_gap, SaddleState,
};
use aorhb_core::linalg::{gaussian_vector, seeded_rng};
use aorhb_core::oracle::{bregman_bound_slacks, gradient_check, three_point_residual, SmoothOracle};
use aorhb_core::solvers::{aor_hb, aor_hb_saddle, aor_hb_two_var, ImplicitSolveCache, InnerSolver, SolverConfig};
use aorhb_core::zoo::{make_lasso, InstanceKind, InstanceSpec, SaddleProblem};
use aorhb_core::{Matrix, Vector};

use super::*;

/// Largest relative analytic-vs-central-difference gradient gap.
pub fn fd_gradient_gap(oracle: &dyn SmoothOracle, seed: u64, points: usize) -> f64 {
    let mut rng = seeded_rng(seed);
    (0..points)
        .map(|_| gradient_check(oracle, &gaussian_vector(oracle.dim(), &mut rng)).unwrap())
        .fold(0.0, f64::max)
}

/// Most negative normalized slack of the eight two-sided Bregman bounds.
pub fn bregman_bounds_worst(oracle: &dyn SmoothOracle, seed: u64, pairs: usize) -> f64 {
    let mut rng = seeded_rng(seed);
    let l = oracle.lipschitz();
    let mut worst = f64::INFINITY;
    for i in 0..pairs {
        let scale = 10f64.powi(i as i32 % 4 - 2);
        let x = gaussian_vector(oracle.dim(), &mut rng);
        let y = &x + gaussian_vector(oracle.dim(), &mut rng) * scale;
        let dx2 = (&x - &y).norm_squared();
        let norm = 1e-300 + l * dx2 + bregman(oracle, &y, &x).abs();
        for s in bregman_bound_slacks(oracle, &x, &y) {
            worst = worst.min(s / norm);
        }
    }
    worst
}

/// Largest normalized residual of the three-point identity.
pub fn three_point_worst(oracle: &dyn SmoothOracle, seed: u64, triples: usize) -> f64 {
    let mut rng = seeded_rng(seed);
    let d = oracle.dim();
    let mut worst: f64 = 0.0;
    for _ in 0..triples {
        let x = gaussian_vector(d, &mut rng);
        let y = gaussian_vector(d, &mut rng);
        let z = gaussian_vector(d, &mut rng);
        let scale = 1.0 + bregman(oracle, &z, &y).abs() + bregman(oracle, &y, &x).abs() + bregman(oracle, &z, &x).abs();
        worst = worst.max(three_point_residual(oracle, &x, &y, &z).abs() / scale);
    }
    worst
}

fn perturbed(center: &Vector, rng: &mut aorhb_core::linalg::Rng, i: usize) -> Vector {
    let scale = 10f64.powi(i as i32 % 5 - 3);
    center + gaussian_vector(center.len(), rng) * scale
}

/// Most negative `gap / (1 + E)` of the smooth strong Lyapunov inequality.
pub fn smooth_strong_lyapunov_worst(oracle: &dyn SmoothOracle, x_star: &Vector, seed: u64, states: usize) -> f64 {
    let mut rng = seeded_rng(seed);
    let mut worst = f64::INFINITY;
    for i in 0..states {
        let x = perturbed(x_star, &mut rng, i);
        let y = perturbed(x_star, &mut rng, i + 2);
        let e = lyapunov_e(oracle, &x, &y, x_star);
        worst = worst.min(strong_lyapunov_gap(oracle, &x, &y, x_star) / (1.0 + e));
    }
    worst
}

/// Same for the composite inequality on a small lasso with `ξ = λ·sign(y)`.
pub fn composite_strong_lyapunov_worst(seed: u64, states: usize) -> f64 {
    let mut rng = seeded_rng(seed);
    let lambda = 0.3;
    let a = aorhb_core::linalg::gaussian_matrix(24, 8, &mut rng);
    let b = gaussian_vector(24, &mut rng);
    let problem = make_lasso(a, b, lambda).unwrap();
    let x_star = problem.reference.as_ref().unwrap().point.clone();
    let f = problem.f.as_ref();
    let mut worst = f64::INFINITY;
    for i in 0..states {
        let x = perturbed(&x_star, &mut rng, i);
        let y = perturbed(&x_star, &mut rng, i + 1);
        let xi = l1_subgradient(&y, lambda);
        let e = lyapunov_e(f, &x, &y, &x_star);
        worst = worst.min(composite_strong_lyapunov_gap(f, &x, &y, &xi, &x_star) / (1.0 + e));
    }
    worst
}

/// Same for the saddle inequality on a small MSPBE instance with the KKT saddle point.
pub fn saddle_strong_lyapunov_worst(seed: u64, states: usize) -> f64 {
    let problem = saddle(12, 5, 30.0, seed);
    let (us, ps) = kkt_saddle_point(&problem);
    let mut rng = seeded_rng(seed ^ 0x5ad);
    let mut worst = f64::INFINITY;
    for i in 0..states {
        let s = SaddleState::new(
            perturbed(&us, &mut rng, i),
            perturbed(&us, &mut rng, i + 1),
            perturbed(&ps, &mut rng, i + 2),
            perturbed(&ps, &mut rng, i + 3),
        );
        let scale = 1.0
            + problem.f.mu() * (&s.v - &us).norm_squared()
            + problem.g.mu() * (&s.q - &ps).norm_squared()
            + bregman(problem.f.as_ref(), &s.u, &us)
            + bregman(problem.g.as_ref(), &s.p, &ps);
        worst = worst.min(saddle_strong_lyapunov_gap(&problem, &s, &us, &ps) / scale);
    }
    worst
}

/// Worst violation of `0 ≤ E^α ≤ 2E` at `α = √(μ/L)`, as a fraction of `E`
/// (positive means violated); an integrity error counts as `+∞`.
pub fn sandwich_worst(oracle: &dyn SmoothOracle, x_star: &Vector, seed: u64, states: usize) -> f64 {
    let alpha = (oracle.mu() / oracle.lipschitz()).sqrt();
    let mut rng = seeded_rng(seed);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..states {
        let x = perturbed(x_star, &mut rng, i);
        let y = perturbed(x_star, &mut rng, i + 3);
        let e = lyapunov_e(oracle, &x, &y, x_star);
        let ea = match lyapunov_e_alpha(oracle, &x, &y, x_star, alpha) {
            Ok(v) => v,
            Err(_) => return f64::INFINITY,
        };
        worst = worst.max((-ea / e).max((ea - 2.0 * e) / e));
    }
    worst
}

/// Largest relative gap between the triple-form and two-variable iterates
/// over `steps` steps, started consistently.
pub fn triple_vs_two_var(oracle: &dyn SmoothOracle, seed: u64, steps: usize) -> f64 {
    let mut rng = seeded_rng(seed);
    let d = oracle.dim();
    let x0 = gaussian_vector(d, &mut rng);
    let y0 = gaussian_vector(d, &mut rng);
    let alpha = (oracle.mu() / oracle.lipschitz()).sqrt();
    let x1 = (&x0 + &y0 * alpha) / (1.0 + alpha);
    let cfg = SolverConfig::new(steps).with_iterates().without_objective();
    let triple = aor_hb(oracle, &x0, Some(&x1), &SolverConfig::new(steps - 1).with_iterates().without_objective()).unwrap();
    let two = aor_hb_two_var(oracle, &x0, &y0, &cfg).unwrap();
    let mut worst: f64 = 0.0;
    for (a, b) in triple.records.iter().zip(&two.records) {
        assert_eq!(a.k, b.k);
        let (xa, xb) = (a.x.as_ref().unwrap(), b.x.as_ref().unwrap());
        worst = worst.max((xa - xb).norm() / xb.norm().max(1.0));
    }
    assert_eq!(triple.records.len(), steps + 1);
    worst
}

/// Largest relative gap between the saddle solver and the difference-equation form.
pub fn saddle_vs_difference_equations(problem: &SaddleProblem, seed: u64, steps: usize) -> f64 {
    let s0 = random_state(problem, seed, 1.0);
    let trace = aor_hb_saddle(problem, &s0, &SolverConfig::new(steps).with_iterates()).unwrap();
    let alpha = trace.alpha.unwrap();
    let mut s = s0;
    let mut worst: f64 = 0.0;
    for r in trace.records.iter().skip(1) {
        s = difference_equation_step(problem, &s, alpha);
        let (primal, aux) = (r.x.as_ref().unwrap(), r.y.as_ref().unwrap());
        let scale = s.primal().norm().max(s.auxiliary().norm()).max(1.0);
        worst = worst.max((primal - s.primal()).norm() / scale).max((aux - s.auxiliary()).norm() / scale);
    }
    assert_eq!(trace.records.len(), steps + 1);
    worst
}

/// Relative residual of the implicit `(v, q)` block solve on random right-hand sides.
pub fn implicit_block_residual(problem: &SaddleProblem, inner: InnerSolver, seed: u64, trials: usize) -> f64 {
    let alpha = 0.37;
    let cache = ImplicitSolveCache::new(problem, alpha, inner).unwrap();
    let (mf, mg) = (problem.f.mu(), problem.g.mu());
    let b: &Matrix = &problem.b;
    let mut rng = seeded_rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let rv = gaussian_vector(problem.m(), &mut rng);
        let rq = gaussian_vector(problem.n(), &mut rng);
        let (v, q) = cache.solve_block(b, &rv, &rq).unwrap();
        let r1 = &v * (1.0 + alpha) + b.tr_mul(&q) * (alpha / mf) - &rv;
        let r2 = &q * (1.0 + alpha) - (b * &v) * (alpha / mg) - &rq;
        let res = (r1.norm_squared() + r2.norm_squared()).sqrt();
        let rhs = (rv.norm_squared() + rq.norm_squared()).sqrt();
        worst = worst.max(res / rhs);
    }
    worst
}

/// Smooth oracles with `μ > 0` together with their reference minimizers.
pub fn strongly_convex_with_minimizers(seed: u64) -> Vec<(&'static str, std::sync::Arc<dyn SmoothOracle>, Vector)> {
    [
        ("quadratic", InstanceSpec::new(InstanceKind::Quadratic, &[12], Some(50.0), seed)),
        ("piecewise", InstanceSpec::new(InstanceKind::Piecewise, &[12, 4], Some(100.0), seed)),
        ("logistic", InstanceSpec::new(InstanceKind::Logistic, &[30, 8], Some(20.0), seed)),
    ]
    .into_iter()
    .map(|(name, spec)| {
        let p = smooth(spec);
        let x = p.reference.unwrap().point;
        (name, p.oracle, x)
    })
    .collect()
}
