use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_extreme_eigenvalues, Matrix, Vector};
use crate::oracle::SmoothOracle;

/// `½xᵀAx − bᵀx + c` with `A` symmetric.
#[derive(Clone, Debug)]
pub struct QuadraticSpec {
    pub a: Matrix,
    pub b: Vector,
    pub c: f64,
}

#[derive(Clone, Debug)]
pub struct Quadratic {
    a: Matrix,
    b: Vector,
    c: f64,
    mu: f64,
    l: f64,
    minimizer: Option<Vector>,
}

fn check_shape(a: &Matrix, b: &Vector) -> Result<()> {
    if !a.is_square() || a.nrows() != b.len() || a.nrows() == 0 {
        return Err(Error::Construction(format!(
            "quadratic needs a square nonempty A matching b (A is {}x{}, b has {})",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let asym = (a - a.transpose()).amax();
    if asym > 1e-10 * a.amax().max(1.0) {
        return Err(Error::Construction(format!("A is not symmetric (max asymmetry {asym:e})")));
    }
    Ok(())
}

impl Quadratic {
    /// Strongly convex quadratic; fails unless `λ_min(A) > 0`.
    pub fn new(a: Matrix, b: Vector, c: f64) -> Result<Self> {
        check_shape(&a, &b)?;
        let (lo, hi) = symmetric_extreme_eigenvalues(&a);
        if !(lo > 0.0) {
            return Err(Error::Construction(format!("A is not positive definite (λ_min = {lo:e})")));
        }
        Self::with_constants(a, b, c, lo, hi)
    }

    /// Convex quadratic with `A ⪰ 0`; eigenvalues below `1e-12·λ_max` count as zero.
    pub fn new_psd(a: Matrix, b: Vector, c: f64) -> Result<Self> {
        check_shape(&a, &b)?;
        let (lo, hi) = symmetric_extreme_eigenvalues(&a);
        let tiny = 1e-12 * hi.abs().max(1.0);
        if lo < -tiny {
            return Err(Error::Construction(format!("A is indefinite (λ_min = {lo:e})")));
        }
        let mu = if lo <= tiny { 0.0 } else { lo };
        Self::with_constants(a, b, c, mu, hi.max(tiny))
    }

    /// Uses the given spectral bounds instead of an eigensolve (for matrices
    /// built from an explicit spectrum).
    pub(crate) fn with_constants(a: Matrix, b: Vector, c: f64, mu: f64, l: f64) -> Result<Self> {
        let minimizer = if mu > 0.0 {
            Cholesky::new(a.clone()).map(|ch| ch.solve(&b))
        } else {
            None
        };
        Ok(Self { a, b, c, mu, l, minimizer })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn linear_term(&self) -> &Vector {
        &self.b
    }

    /// `A⁻¹b` when `A` is positive definite.
    pub fn minimizer(&self) -> Option<&Vector> {
        self.minimizer.as_ref()
    }
}

pub fn make_quadratic(spec: &QuadraticSpec) -> Result<Quadratic> {
    Quadratic::new(spec.a.clone(), spec.b.clone(), spec.c)
}

impl SmoothOracle for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.a * x)) - self.b.dot(x) + self.c
    }
    fn gradient(&self, x: &Vector) -> Vector {
        &self.a * x - &self.b
    }
    fn mu(&self) -> f64 {
        self.mu
    }
    fn lipschitz(&self) -> f64 {
        self.l
    }
    fn bregman_closed_form(&self, y: &Vector, x: &Vector) -> Option<f64> {
        let e = y - x;
        Some(0.5 * e.dot(&(&self.a * &e)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{geometric_spacing, seeded_rng, spd_with_spectrum};
    use crate::oracle::gradient_check;

    #[test]
    fn identity_quadratic() {
        let q = Quadratic::new(Matrix::identity(2, 2), Vector::zeros(2), 0.0).unwrap();
        let x = Vector::from_vec(vec![1.0, 1.0]);
        assert_eq!(q.value(&x), 1.0);
        assert_eq!(q.gradient(&x), x);
    }

    #[test]
    fn diagonal_constants() {
        let a = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 4.0]));
        let q = Quadratic::new(a, Vector::zeros(2), 0.0).unwrap();
        assert!((q.mu() - 1.0).abs() < 1e-14 && (q.lipschitz() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_indefinite() {
        let a = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, -1.0]));
        assert!(matches!(Quadratic::new(a, Vector::zeros(2), 0.0), Err(Error::Construction(_))));
    }

    #[test]
    fn rejects_asymmetric() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(Quadratic::new(a, Vector::zeros(2), 0.0).is_err());
    }

    #[test]
    fn random_spd_gradient_matches_fd() {
        let mut rng = seeded_rng(1);
        let a = spd_with_spectrum(&geometric_spacing(1.0, 100.0, 50), &mut rng);
        let b = crate::linalg::gaussian_vector(50, &mut rng);
        let q = Quadratic::new(a, b, 0.3).unwrap();
        let x = crate::linalg::gaussian_vector(50, &mut rng);
        assert!(gradient_check(&q, &x).unwrap() < 1e-6);
    }

    #[test]
    fn minimizer_has_zero_gradient() {
        let mut rng = seeded_rng(2);
        let a = spd_with_spectrum(&geometric_spacing(1.0, 1e3, 10), &mut rng);
        let b = crate::linalg::gaussian_vector(10, &mut rng);
        let q = Quadratic::new(a, b, 0.0).unwrap();
        assert!(q.gradient(q.minimizer().unwrap()).norm() < 1e-9);
    }
}
