use crate::error::{Error, Result};
use crate::linalg::{gram_extreme_eigenvalues, Matrix, Vector};
use crate::oracle::SmoothOracle;

/// `Σᵢ log(1 + exp(−bᵢaᵢᵀx)) + (λ/2)‖x‖²` with rows `aᵢ` of `features`.
#[derive(Clone, Debug)]
pub struct LogisticSpec {
    pub features: Matrix,
    pub labels: Vector,
    pub lambda_reg: f64,
}

#[derive(Clone, Debug)]
pub struct Logistic {
    a: Matrix,
    labels: Vector,
    lambda: f64,
    l: f64,
}

/// `log(1 + eˢ)` without overflow.
fn softplus(s: f64) -> f64 {
    s.max(0.0) + (-s.abs()).exp().ln_1p()
}

/// `1 / (1 + e⁻ˢ)` without overflow.
fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

pub fn make_logistic(spec: &LogisticSpec) -> Result<Logistic> {
    let LogisticSpec { features, labels, lambda_reg } = spec;
    if features.nrows() == 0 || features.ncols() == 0 {
        return Err(Error::Construction("logistic regression needs a nonempty dataset".into()));
    }
    if features.nrows() != labels.len() {
        return Err(Error::Construction(format!(
            "{} feature rows but {} labels",
            features.nrows(),
            labels.len()
        )));
    }
    if let Some(bad) = labels.iter().find(|&&b| b != 1.0 && b != -1.0) {
        return Err(Error::Construction(format!("labels must be ±1, found {bad}")));
    }
    if !(*lambda_reg >= 0.0) {
        return Err(Error::Construction(format!("regularization must be nonnegative, got {lambda_reg}")));
    }
    // Σ aᵢaᵢᵀ = AᵀA.
    let (_, top) = gram_extreme_eigenvalues(features);
    Ok(Logistic { a: features.clone(), labels: labels.clone(), lambda: *lambda_reg, l: top + lambda_reg })
}

impl Logistic {
    pub fn features(&self) -> &Matrix {
        &self.a
    }
}

impl SmoothOracle for Logistic {
    fn dim(&self) -> usize {
        self.a.ncols()
    }
    fn value(&self, x: &Vector) -> f64 {
        let margins = &self.a * x;
        let loss: f64 = margins.iter().zip(self.labels.iter()).map(|(&m, &b)| softplus(-b * m)).sum();
        loss + 0.5 * self.lambda * x.norm_squared()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        let margins = &self.a * x;
        let w = Vector::from_iterator(
            margins.len(),
            margins.iter().zip(self.labels.iter()).map(|(&m, &b)| -b * sigmoid(-b * m)),
        );
        self.a.tr_mul(&w) + x * self.lambda
    }
    fn mu(&self) -> f64 {
        self.lambda
    }
    fn lipschitz(&self) -> f64 {
        self.l
    }
}
