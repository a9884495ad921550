use crate::error::{Error, Result};
use crate::linalg::{dense_spectral_norm, spectral_norm, Matrix, Vector, DEFAULT_POWER_ITERS};
use crate::oracle::SmoothOracle;

/// `h(t) = ½t²e^{−r/t}` for `t > 0`, else 0.
pub fn h(t: f64, r: f64) -> f64 {
    if t > 0.0 {
        0.5 * t * t * (-r / t).exp()
    } else {
        0.0
    }
}

/// `h′(t) = e^{−r/t}(t + r/2)` for `t > 0`, else 0.
pub fn h_prime(t: f64, r: f64) -> f64 {
    if t > 0.0 {
        (-r / t).exp() * (t + 0.5 * r)
    } else {
        0.0
    }
}

/// Data for `f(x) = Σᵢ h(aᵢᵀx − bᵢ) + (μ/2)‖x‖²`; `a` is rescaled on
/// construction so that `‖A‖ = √(L − μ)`.
#[derive(Clone, Debug)]
pub struct PiecewiseSpec {
    /// `d × p`, columns `aᵢ`.
    pub a: Matrix,
    pub b: Vector,
    pub mu: f64,
    pub lipschitz: f64,
    pub r: f64,
}

#[derive(Clone, Debug)]
pub struct Piecewise {
    a: Matrix,
    b: Vector,
    mu: f64,
    l: f64,
    r: f64,
}

impl Piecewise {
    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    fn residuals(&self, x: &Vector) -> Vector {
        self.a.tr_mul(x) - &self.b
    }
}

pub fn make_piecewise(spec: &PiecewiseSpec) -> Result<Piecewise> {
    let PiecewiseSpec { a, b, mu, lipschitz: l, r } = spec;
    if !(*r > 0.0 && *mu > 0.0 && *l > *mu) {
        return Err(Error::Construction(format!("piecewise needs r > 0 and 0 < μ < L (r={r}, μ={mu}, L={l})")));
    }
    if a.ncols() != b.len() || a.nrows() == 0 {
        return Err(Error::Construction(format!(
            "A is {}x{} but b has {} entries",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let norm = dense_spectral_norm(a);
    if !(norm > 0.0) {
        return Err(Error::Construction("A is zero; cannot rescale".into()));
    }
    let target = (l - mu).sqrt();
    let scaled = a * (target / norm);
    let check = spectral_norm(&scaled, DEFAULT_POWER_ITERS, 0);
    if ((check - target) / target).abs() > 1e-4 {
        return Err(Error::Construction(format!("rescaled ‖A‖ = {check} deviates from √(L−μ) = {target}")));
    }
    Ok(Piecewise { a: scaled, b: b.clone(), mu: *mu, l: *l, r: *r })
}

impl SmoothOracle for Piecewise {
    fn dim(&self) -> usize {
        self.a.nrows()
    }
    fn value(&self, x: &Vector) -> f64 {
        let s: f64 = self.residuals(x).iter().map(|&t| h(t, self.r)).sum();
        s + 0.5 * self.mu * x.norm_squared()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        let w = self.residuals(x).map(|t| h_prime(t, self.r));
        &self.a * w + x * self.mu
    }
    fn mu(&self) -> f64 {
        self.mu
    }
    fn lipschitz(&self) -> f64 {
        self.l
    }
}
