use crate::error::{Error, Result};
use crate::linalg::{gram_extreme_eigenvalues, spectral_norm, Matrix, SymmetricFnMap, Vector, DEFAULT_POWER_ITERS};
use crate::oracle::SmoothOracle;

/// Dimension up to which `(μ, L)` come from a dense eigensolve.
pub const DENSE_EIGEN_LIMIT: usize = 512;

/// `½‖Ax − b‖²`, possibly rank deficient (then `μ = 0`).
#[derive(Clone, Debug)]
pub struct LeastSquares {
    a: Matrix,
    b: Vector,
    mu: f64,
    l: f64,
}

impl LeastSquares {
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        if a.nrows() != b.len() || a.ncols() == 0 || a.nrows() == 0 {
            return Err(Error::Construction(format!(
                "least squares needs A with rows matching b (A is {}x{}, b has {})",
                a.nrows(),
                a.ncols(),
                b.len()
            )));
        }
        let (lo, hi) = gram_constants(&a);
        let mu = if lo <= 1e-10 * hi { 0.0 } else { lo };
        Ok(Self { a, b, mu, l: hi })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn rhs(&self) -> &Vector {
        &self.b
    }

    /// Minimum-norm minimizer `A⁺b`.
    pub fn min_norm_solution(&self) -> Vector {
        let svd = self.a.clone().svd(true, true);
        let tol = 1e-12 * svd.singular_values.max();
        svd.solve(&self.b, tol).expect("SVD with both factors computed")
    }

    /// Minimizer closest to `x0`: `A⁺b + (I − A⁺A)x0`.
    pub fn projected_solution(&self, x0: &Vector) -> Vector {
        let svd = self.a.clone().svd(true, true);
        let tol = 1e-12 * svd.singular_values.max();
        let x_ls = svd.solve(&self.b, tol).expect("SVD with both factors computed");
        let ax0 = &self.a * x0;
        let back = svd.solve(&ax0, tol).expect("SVD with both factors computed");
        x_ls + x0 - back
    }
}

/// `(λ_min, λ_max)` of `AᵀA`: dense below [`DENSE_EIGEN_LIMIT`], power iteration above.
pub(crate) fn gram_constants(a: &Matrix) -> (f64, f64) {
    if a.ncols() <= DENSE_EIGEN_LIMIT {
        return gram_extreme_eigenvalues(a);
    }
    let gram = SymmetricFnMap::new(a.ncols(), |x: &Vector| a.tr_mul(&(a * x)));
    let l = spectral_norm(&gram, DEFAULT_POWER_ITERS, 0);
    let shifted = SymmetricFnMap::new(a.ncols(), |x: &Vector| x * l - a.tr_mul(&(a * x)));
    let top = spectral_norm(&shifted, 4 * DEFAULT_POWER_ITERS, 1);
    ((l - top).max(0.0), l)
}

impl SmoothOracle for LeastSquares {
    fn dim(&self) -> usize {
        self.a.ncols()
    }
    fn value(&self, x: &Vector) -> f64 {
        0.5 * (&self.a * x - &self.b).norm_squared()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        self.a.tr_mul(&(&self.a * x - &self.b))
    }
    fn mu(&self) -> f64 {
        self.mu
    }
    fn lipschitz(&self) -> f64 {
        self.l
    }
    fn bregman_closed_form(&self, y: &Vector, x: &Vector) -> Option<f64> {
        Some(0.5 * (&self.a * (y - x)).norm_squared())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, gaussian_vector, seeded_rng};

    #[test]
    fn rank_deficient_has_zero_mu() {
        let mut rng = seeded_rng(3);
        let a = gaussian_matrix(10, 4, &mut rng) * gaussian_matrix(4, 8, &mut rng);
        let ls = LeastSquares::new(a, gaussian_vector(10, &mut rng)).unwrap();
        assert_eq!(ls.mu(), 0.0);
        assert!(ls.lipschitz() > 0.0);
    }

    #[test]
    fn projected_solution_is_optimal_and_closest() {
        let mut rng = seeded_rng(4);
        let a = gaussian_matrix(12, 5, &mut rng) * gaussian_matrix(5, 9, &mut rng);
        let ls = LeastSquares::new(a, gaussian_vector(12, &mut rng)).unwrap();
        let x0 = gaussian_vector(9, &mut rng);
        let xs = ls.projected_solution(&x0);
        assert!(ls.gradient(&xs).norm() < 1e-9);
        assert!((ls.value(&xs) - ls.value(&ls.min_norm_solution())).abs() < 1e-10);
        // x0 − x* lies in the row space: A⁺A(x0 − x*) = x0 − x*.
        let d = &x0 - &xs;
        let proj = ls.matrix().clone().svd(true, true).solve(&(ls.matrix() * &d), 1e-10).unwrap();
        assert!((proj - &d).norm() < 1e-9 * (1.0 + d.norm()));
    }

    #[test]
    fn power_iteration_constants_agree_with_dense() {
        let mut rng = seeded_rng(5);
        let a = gaussian_matrix(40, 12, &mut rng);
        let (lo, hi) = gram_extreme_eigenvalues(&a);
        let gram = SymmetricFnMap::new(12, |x: &Vector| a.tr_mul(&(&a * x)));
        let l = spectral_norm(&gram, 2000, 0);
        assert!((l - hi).abs() < 1e-8 * hi);
        assert!(lo > 0.0);
    }
}
