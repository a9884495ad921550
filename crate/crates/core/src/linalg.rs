//! Dense vector/matrix helpers, matrix-free linear maps and seeded random
//! generators shared by the problem zoo and the solvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Deterministic generator used everywhere randomness is needed.
pub type Rng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector(n: usize, rng: &mut Rng) -> Vector {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

/// Row-major fill so the sample stream does not depend on nalgebra's storage order.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    let data: Vec<f64> = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
    DMatrix::from_row_slice(rows, cols, &data)
}

/// Haar-ish random orthogonal matrix: Q factor of a Gaussian matrix with the
/// sign ambiguity of the QR fixed by the diagonal of R.
pub fn random_orthogonal(n: usize, rng: &mut Rng) -> Matrix {
    let g = gaussian_matrix(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `Q diag(spectrum) Qᵀ` for a random orthogonal `Q`, symmetrized exactly.
pub fn spd_with_spectrum(spectrum: &[f64], rng: &mut Rng) -> Matrix {
    let n = spectrum.len();
    let q = random_orthogonal(n, rng);
    let mut scaled = q.clone();
    for (j, &s) in spectrum.iter().enumerate() {
        scaled.column_mut(j).scale_mut(s);
    }
    let a = &scaled * q.transpose();
    symmetrize(&a)
}

pub fn symmetrize(a: &Matrix) -> Matrix {
    (a + a.transpose()) * 0.5
}

/// `n` values spaced evenly in log scale from `lo` to `hi` (both included).
pub fn geometric_spacing(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn symmetric_extreme_eigenvalues(a: &Matrix) -> (f64, f64) {
    let eig = SymmetricEigen::new(a.clone());
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// Extreme eigenvalues of `AᵀA` (size `cols`). When `rows < cols` the
/// smallest eigenvalue is exactly zero and the Gram matrix on the short side
/// supplies the largest one.
pub fn gram_extreme_eigenvalues(a: &Matrix) -> (f64, f64) {
    if a.nrows() >= a.ncols() {
        symmetric_extreme_eigenvalues(&symmetrize(&(a.transpose() * a)))
    } else {
        let (_, max) = symmetric_extreme_eigenvalues(&symmetrize(&(a * a.transpose())));
        (0.0, max)
    }
}

/// Exact spectral norm through the Gram matrix on the smaller side.
pub fn dense_spectral_norm(a: &Matrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let gram = if a.nrows() <= a.ncols() {
        a * a.transpose()
    } else {
        a.transpose() * a
    };
    symmetric_extreme_eigenvalues(&symmetrize(&gram)).1.max(0.0).sqrt()
}

pub fn all_finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}

pub fn ensure_finite(v: &Vector, op: &'static str, iter: usize) -> Result<()> {
    if all_finite(v) {
        Ok(())
    } else {
        Err(Error::NonFinite { op, iter })
    }
}

/// A linear map `Rⁿ → Rᵐ` known only through products with it and its transpose.
pub trait LinearMap {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &Vector) -> Vector;
    fn apply_transpose(&self, y: &Vector) -> Vector;
}

impl LinearMap for Matrix {
    fn nrows(&self) -> usize {
        self.nrows()
    }
    fn ncols(&self) -> usize {
        self.ncols()
    }
    fn apply(&self, x: &Vector) -> Vector {
        self * x
    }
    fn apply_transpose(&self, y: &Vector) -> Vector {
        self.tr_mul(y)
    }
}

/// Symmetric matrix-free operator given by a closure.
pub struct SymmetricFnMap<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&Vector) -> Vector> SymmetricFnMap<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&Vector) -> Vector> LinearMap for SymmetricFnMap<F> {
    fn nrows(&self) -> usize {
        self.dim
    }
    fn ncols(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &Vector) -> Vector {
        (self.f)(x)
    }
    fn apply_transpose(&self, y: &Vector) -> Vector {
        (self.f)(y)
    }
}

/// General matrix-free operator: forward and adjoint closures.
pub struct FnMap<F, G> {
    rows: usize,
    cols: usize,
    forward: F,
    adjoint: G,
}

impl<F, G> FnMap<F, G>
where
    F: Fn(&Vector) -> Vector,
    G: Fn(&Vector) -> Vector,
{
    pub fn new(rows: usize, cols: usize, forward: F, adjoint: G) -> Self {
        Self { rows, cols, forward, adjoint }
    }
}

impl<F, G> LinearMap for FnMap<F, G>
where
    F: Fn(&Vector) -> Vector,
    G: Fn(&Vector) -> Vector,
{
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn apply(&self, x: &Vector) -> Vector {
        (self.forward)(x)
    }
    fn apply_transpose(&self, y: &Vector) -> Vector {
        (self.adjoint)(y)
    }
}

/// The adjoint of another map.
pub struct Transposed<'a, M: ?Sized>(pub &'a M);

impl<M: LinearMap + ?Sized> LinearMap for Transposed<'_, M> {
    fn nrows(&self) -> usize {
        self.0.ncols()
    }
    fn ncols(&self) -> usize {
        self.0.nrows()
    }
    fn apply(&self, x: &Vector) -> Vector {
        self.0.apply_transpose(x)
    }
    fn apply_transpose(&self, y: &Vector) -> Vector {
        self.0.apply(y)
    }
}

/// Default iteration count for spectral-constant estimates.
pub const DEFAULT_POWER_ITERS: usize = 200;

/// Largest singular value of `map` by power iteration on `MᵀM`.
///
/// The estimate after `i` steps is `‖M xᵢ‖` for the normalized iterate
/// `xᵢ ∝ (MᵀM)ⁱ x₀`, a Rayleigh quotient of `MᵀM` that cannot decrease with
/// more iterations. A map that annihilates the start vector yields 0.
pub fn spectral_norm<M: LinearMap + ?Sized>(map: &M, iters: usize, seed: u64) -> f64 {
    let n = map.ncols();
    if n == 0 || map.nrows() == 0 {
        return 0.0;
    }
    let mut rng = seeded_rng(seed);
    let mut x = gaussian_vector(n, &mut rng);
    x /= x.norm();
    let mut estimate = 0.0;
    for _ in 0..iters.max(1) {
        let y = map.apply(&x);
        estimate = y.norm();
        if estimate == 0.0 {
            return 0.0;
        }
        let z = map.apply_transpose(&y);
        let z_norm = z.norm();
        if z_norm == 0.0 {
            return estimate;
        }
        x = z / z_norm;
    }
    estimate
}

/// Largest eigenvalue of a symmetric positive semi-definite map.
pub fn power_max_eigenvalue<M: LinearMap + ?Sized>(map: &M, iters: usize, seed: u64) -> f64 {
    spectral_norm(map, iters, seed)
}
