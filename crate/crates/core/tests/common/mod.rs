#![allow(dead_code)]

pub mod checks;

use std::sync::Arc;

use aorhb_core::diagnostics::SaddleState;
use aorhb_core::linalg::{gaussian_matrix, gaussian_vector, geometric_spacing, seeded_rng, spd_with_spectrum};
use aorhb_core::oracle::SmoothOracle;
use aorhb_core::zoo::{InstanceKind, InstanceSpec, LeastSquares, Problem, Quadratic, SaddleProblem, SmoothProblem};
use aorhb_core::{Matrix, Vector};

/// Quadratic `½xᵀAx` with spectrum geometric in `[1, κ]` and minimizer 0.
pub fn centered_quadratic(d: usize, kappa: f64, seed: u64) -> Quadratic {
    let mut rng = seeded_rng(seed);
    let a = spd_with_spectrum(&geometric_spacing(1.0, kappa, d), &mut rng);
    Quadratic::new(a, Vector::zeros(d), 0.0).unwrap()
}

/// Rank-deficient `½‖Ax − b‖²` with `A` of shape `rows×cols` and the given rank.
pub fn singular_least_squares(rows: usize, cols: usize, rank: usize, seed: u64) -> LeastSquares {
    let mut rng = seeded_rng(seed);
    let a = gaussian_matrix(rows, rank, &mut rng) * gaussian_matrix(rank, cols, &mut rng);
    let b = gaussian_vector(rows, &mut rng);
    LeastSquares::new(a, b).unwrap()
}

pub fn smooth(spec: InstanceSpec) -> SmoothProblem {
    match spec.build().unwrap() {
        Problem::Smooth(p) => p,
        other => panic!("expected a smooth instance, got {}", other.class()),
    }
}

pub fn saddle(m: usize, n: usize, kappa_g: f64, seed: u64) -> SaddleProblem {
    match InstanceSpec::new(InstanceKind::Mspbe, &[m, n], Some(kappa_g), seed).build().unwrap() {
        Problem::Saddle(p) => p,
        other => panic!("expected a saddle instance, got {}", other.class()),
    }
}

/// Every smooth oracle the zoo can produce, at small sizes.
pub fn zoo_oracles(seed: u64) -> Vec<(&'static str, Arc<dyn SmoothOracle>)> {
    let mut out: Vec<(&'static str, Arc<dyn SmoothOracle>)> = vec![
        ("quadratic", smooth(InstanceSpec::new(InstanceKind::Quadratic, &[12], Some(50.0), seed)).oracle),
        ("piecewise", smooth(InstanceSpec::new(InstanceKind::Piecewise, &[12, 4], Some(100.0), seed)).oracle),
        ("logistic", smooth(InstanceSpec::new(InstanceKind::Logistic, &[30, 8], Some(20.0), seed)).oracle),
        (
            "least_squares_singular",
            smooth(InstanceSpec::new(InstanceKind::LeastSquaresSingular, &[15, 10, 5], None, seed)).oracle,
        ),
    ];
    if let Problem::Composite(c) = InstanceSpec::new(InstanceKind::Lasso, &[24, 8], None, seed).build().unwrap() {
        out.push(("lasso_smooth_part", c.f));
    }
    let s = saddle(12, 5, 30.0, seed);
    out.push(("mspbe_f", s.f.clone()));
    out.push(("mspbe_g", s.g.clone()));
    out
}

/// Hessian and gradient at zero of a quadratic oracle, read off from gradient differences.
fn quadratic_parts(oracle: &dyn SmoothOracle) -> (Matrix, Vector) {
    let d = oracle.dim();
    let g0 = oracle.gradient(&Vector::zeros(d));
    let mut h = Matrix::zeros(d, d);
    for i in 0..d {
        let mut e = Vector::zeros(d);
        e[i] = 1.0;
        h.set_column(i, &(oracle.gradient(&e) - &g0));
    }
    (h, g0)
}

/// Saddle point of a quadratic-quadratic problem from the dense KKT system
/// `[[H_f, Bᵀ], [−B, H_g]] [u; p] = −[∇f(0); ∇g(0)]`.
pub fn kkt_saddle_point(problem: &SaddleProblem) -> (Vector, Vector) {
    let (m, n) = (problem.m(), problem.n());
    let (hf, gf0) = quadratic_parts(problem.f.as_ref());
    let (hg, gg0) = quadratic_parts(problem.g.as_ref());
    let mut k = Matrix::zeros(m + n, m + n);
    k.view_mut((0, 0), (m, m)).copy_from(&hf);
    k.view_mut((0, m), (m, n)).copy_from(&problem.b.transpose());
    k.view_mut((m, 0), (n, m)).copy_from(&(-&problem.b));
    k.view_mut((m, m), (n, n)).copy_from(&hg);
    let mut rhs = Vector::zeros(m + n);
    rhs.rows_mut(0, m).copy_from(&(-gf0));
    rhs.rows_mut(m, n).copy_from(&(-gg0));
    let z = k.lu().solve(&rhs).expect("KKT system is singular");
    (z.rows(0, m).into_owned(), z.rows(m, n).into_owned())
}

/// One step of the saddle iteration written as four implicit difference
/// equations, each solved for its new variable:
/// `(u'−u)/α = v − u'`, `(p'−p)/α = q − p'`,
/// `(v'−v)/α = u' − v' − (2∇f(u') − ∇f(u) + Bᵀq)/μ_f`,
/// `(q'−q)/α = p' − q' − (2∇g(p') − ∇g(p) − B(2v' − v))/μ_g`.
pub fn difference_equation_step(problem: &SaddleProblem, s: &SaddleState, alpha: f64) -> SaddleState {
    let (mf, mg) = (problem.f.mu(), problem.g.mu());
    let inv = 1.0 / alpha;
    let lead = inv + 1.0;
    let u1 = (&s.u * inv + &s.v) / lead;
    let p1 = (&s.p * inv + &s.q) / lead;
    let rf = problem.f.gradient(&u1) * 2.0 - problem.f.gradient(&s.u) + problem.b.tr_mul(&s.q);
    let v1 = (&s.v * inv + &u1 - rf / mf) / lead;
    let rg = problem.g.gradient(&p1) * 2.0 - problem.g.gradient(&s.p) - &problem.b * (&v1 * 2.0 - &s.v);
    let q1 = (&s.q * inv + &p1 - rg / mg) / lead;
    SaddleState::new(u1, v1, p1, q1)
}

pub fn random_state(problem: &SaddleProblem, seed: u64, scale: f64) -> SaddleState {
    let mut rng = seeded_rng(seed);
    let (m, n) = (problem.m(), problem.n());
    SaddleState::new(
        gaussian_vector(m, &mut rng) * scale,
        gaussian_vector(m, &mut rng) * scale,
        gaussian_vector(n, &mut rng) * scale,
        gaussian_vector(n, &mut rng) * scale,
    )
}

/// `λ·sign(y)` with 0 on zero entries: a subgradient of `λ‖·‖₁` at `y`.
pub fn l1_subgradient(y: &Vector, lambda: f64) -> Vector {
    y.map(|t| if t > 0.0 { lambda } else if t < 0.0 { -lambda } else { 0.0 })
}

/// Piecewise instance (d = 50, p = 5, μ = 1, L = 10⁴, r = 10⁻⁶) and its starting point.
pub fn piecewise_case(seed: u64) -> (SmoothProblem, Vector) {
    let p = smooth(
        InstanceSpec::new(InstanceKind::Piecewise, &[50, 5], Some(1e4), seed).with_param("mu", 1.0).with_param("r", 1e-6),
    );
    let x0 = gaussian_vector(50, &mut seeded_rng(seed + 1000));
    (p, x0)
}
