use std::sync::Arc;

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::linalg::{gaussian_matrix, gaussian_vector, seeded_rng, Matrix, Vector};
use crate::oracle::{ProxOracle, SmoothOracle};
use crate::prox::{L1MinusL2Prox, L1Prox};
use crate::solvers::Reference;

use super::{CompositeProblem, LeastSquares};

/// Iteration cap for the proximal-gradient reference run.
pub const REFERENCE_MAX_ITERS: usize = 1_000_000;
/// Fixed-point residual at which the reference run stops, relative to `1 + ‖x‖`.
pub const REFERENCE_TOLERANCE: f64 = 1e-12;

/// `½‖Ax − b‖² + λ‖x‖₁` with a proximal-gradient reference solution.
///
/// `λ = 0` is accepted and gives plain least squares.
pub fn make_lasso(a: Matrix, b: Vector, lambda: f64) -> Result<CompositeProblem> {
    if !(lambda >= 0.0) {
        return Err(Error::Construction(format!("lasso weight must be nonnegative, got {lambda}")));
    }
    let g: Arc<dyn ProxOracle> = Arc::new(L1Prox { dim: a.ncols(), weight: lambda });
    build(a, b, g, true)
}

/// `½‖Ax − b‖² + λ(‖x‖₁ − ‖x‖₂)`; the reference is a stationary point found
/// by proximal gradient from the origin and is flagged self-consistent.
pub fn make_l1l2(a: Matrix, b: Vector, lambda: f64) -> Result<CompositeProblem> {
    if !(lambda >= 0.0) {
        return Err(Error::Construction(format!("ℓ1−ℓ2 weight must be nonnegative, got {lambda}")));
    }
    let g: Arc<dyn ProxOracle> = Arc::new(L1MinusL2Prox { dim: a.ncols(), weight: lambda });
    build(a, b, g, false)
}

fn build(a: Matrix, b: Vector, g: Arc<dyn ProxOracle>, convex: bool) -> Result<CompositeProblem> {
    let f = LeastSquares::new(a, b)?;
    if f.mu() == 0.0 {
        return Err(Error::Construction(
            "AᵀA is singular (μ = 0): use aor_hb_zero for the unregularized problem or add an ℓ2 term".into(),
        ));
    }
    let f: Arc<dyn SmoothOracle> = Arc::new(f);
    let mut problem = CompositeProblem::new(f, g)?;
    let (x, _) = proximal_gradient_fixed_point(&problem, &Vector::zeros(problem.dim()), REFERENCE_TOLERANCE, REFERENCE_MAX_ITERS)?;
    let value = problem.objective(&x);
    problem.reference = Some(Reference { point: x, value, self_consistent: !convex });
    Ok(problem)
}

/// Runs `x ← prox_{g/L}(x − ∇f(x)/L)` until `‖x_{k+1} − x_k‖ ≤ tol·(1 + ‖x_k‖)`.
///
/// Returns the final point and its residual; hitting `max_iters` is not an
/// error, the caller decides from the residual.
pub fn proximal_gradient_fixed_point(
    problem: &CompositeProblem,
    x0: &Vector,
    tol: f64,
    max_iters: usize,
) -> Result<(Vector, f64)> {
    let step = 1.0 / problem.f.lipschitz();
    let mut x = x0.clone();
    let mut residual = f64::INFINITY;
    for k in 0..max_iters {
        let next = problem.g.prox(&(&x - problem.f.gradient(&x) * step), step)?;
        crate::linalg::ensure_finite(&next, "proximal gradient reference", k)?;
        residual = (&next - &x).norm();
        let scale = 1.0 + x.norm();
        x = next;
        if residual <= tol * scale {
            break;
        }
    }
    Ok((x, residual))
}

/// Gaussian sparse-recovery data: `A` is `rows × cols` standard normal, the
/// ground truth has `sparsity` Gaussian nonzeros, and `b = A x_true`.
pub fn sparse_recovery_data(rows: usize, cols: usize, sparsity: usize, seed: u64) -> Result<(Matrix, Vector, Vector)> {
    if sparsity > cols {
        return Err(Error::InvalidInput(format!("sparsity {sparsity} exceeds dimension {cols}")));
    }
    let mut rng = seeded_rng(seed);
    let a = gaussian_matrix(rows, cols, &mut rng);
    let mut x_true = Vector::zeros(cols);
    let support = sample(&mut rng, cols, sparsity).into_vec();
    let values = gaussian_vector(sparsity, &mut rng);
    for (i, &j) in support.iter().enumerate() {
        x_true[j] = values[i];
    }
    let b = &a * &x_true;
    Ok((a, b, x_true))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_soft_threshold_solution() {
        let p = make_lasso(Matrix::identity(3, 3), Vector::from_vec(vec![1.0, 0.0, 0.0]), 0.5).unwrap();
        let r = p.reference.unwrap();
        assert!((r.point - Vector::from_vec(vec![0.5, 0.0, 0.0])).norm() < 1e-12);
        assert!(!r.self_consistent);
    }

    #[test]
    fn zero_weight_is_least_squares() {
        let mut rng = seeded_rng(1);
        let a = gaussian_matrix(20, 5, &mut rng);
        let b = gaussian_vector(20, &mut rng);
        let p = make_lasso(a.clone(), b.clone(), 0.0).unwrap();
        let normal = (a.transpose() * &a).cholesky().unwrap().solve(&a.tr_mul(&b));
        assert!((p.reference.unwrap().point - normal).norm() < 1e-10);
    }

    #[test]
    fn singular_gram_is_rejected() {
        let a = Matrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let err = make_lasso(a, Vector::zeros(2), 0.1).err().unwrap();
        assert!(err.to_string().contains("aor_hb_zero"));
    }

    #[test]
    fn generator_is_deterministic_and_sparse() {
        let (a1, b1, x1) = sparse_recovery_data(64, 16, 5, 3).unwrap();
        let (a2, b2, x2) = sparse_recovery_data(64, 16, 5, 3).unwrap();
        assert_eq!((a1, b1), (a2, b2));
        assert_eq!(x1.iter().filter(|v| **v != 0.0).count(), 5);
        assert_eq!(x1, x2);
    }

    #[test]
    fn reference_satisfies_optimality() {
        let (a, b, _) = sparse_recovery_data(64, 16, 3, 5).unwrap();
        let p = make_lasso(a, b, 0.8).unwrap();
        let x = p.reference.as_ref().unwrap().point.clone();
        let g = p.f.gradient(&x);
        for i in 0..x.len() {
            if x[i] != 0.0 {
                assert!((g[i] + 0.8 * x[i].signum()).abs() < 1e-8);
            } else {
                assert!(g[i].abs() <= 0.8 + 1e-8);
            }
        }
    }
}
