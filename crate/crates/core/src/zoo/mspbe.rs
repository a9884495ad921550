use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{gaussian_matrix, gaussian_vector, geometric_spacing, seeded_rng, spd_with_spectrum, Matrix, Vector};
use crate::oracle::SmoothOracle;

use super::{Quadratic, SaddleProblem, SaddleReference};

/// Saddle form of the projected Bellman error:
/// `f(u) = ½‖u‖²`, `g(p) = ½pᵀCp + ⟨b, p⟩`, coupling `B` (`n × m`).
///
/// The reference saddle point comes from the linear optimality system
/// `u + Bᵀp = 0`, `Cp + b − Bu = 0`, i.e. `p* = −(BBᵀ + C)⁻¹b`, `u* = −Bᵀp*`.
pub fn make_mspbe(b_mat: Matrix, c: Matrix, b: Vector) -> Result<SaddleProblem> {
    let (n, m) = b_mat.shape();
    if c.shape() != (n, n) || b.len() != n {
        return Err(Error::Construction(format!(
            "MSPBE needs C {n}x{n} and b of length {n}, got C {:?} and b of length {}",
            c.shape(),
            b.len()
        )));
    }
    let g = Quadratic::new(c.clone(), -&b, 0.0)?;
    let f = Quadratic::with_constants(Matrix::identity(m, m), Vector::zeros(m), 0.0, 1.0, 1.0)?;
    let f: Arc<dyn SmoothOracle> = Arc::new(f);
    let g: Arc<dyn SmoothOracle> = Arc::new(g);
    let mut problem = SaddleProblem::new(f, g, b_mat)?;
    let schur = &problem.b * problem.b.transpose() + &c;
    let p = schur
        .cholesky()
        .ok_or_else(|| Error::Construction("BBᵀ + C is not positive definite".into()))?
        .solve(&(-&b));
    let u = -problem.b.tr_mul(&p);
    problem.reference = Some(SaddleReference { u, p, self_consistent: false });
    Ok(problem)
}

/// Random instance with `‖B‖² = κ_g` and `C`'s spectrum geometric on `[1, κ_g]`.
pub fn generate_mspbe(m: usize, n: usize, kappa_g: f64, seed: u64) -> Result<SaddleProblem> {
    if m == 0 || n == 0 || !(kappa_g >= 1.0) {
        return Err(Error::InvalidInput(format!("MSPBE needs m, n ≥ 1 and κ_g ≥ 1 (m={m}, n={n}, κ_g={kappa_g})")));
    }
    let mut rng = seeded_rng(seed);
    let raw = gaussian_matrix(n, m, &mut rng);
    let norm = crate::linalg::dense_spectral_norm(&raw);
    let b_mat = raw * (kappa_g.sqrt() / norm);
    let c = spd_with_spectrum(&geometric_spacing(1.0, kappa_g, n), &mut rng);
    let b = gaussian_vector(n, &mut rng);
    make_mspbe(b_mat, c, b)
}
