//! Problem constructors with certified constants and seeded generators.

pub mod instance;
pub mod lasso;
pub mod least_squares;
pub mod logistic;
pub mod mspbe;
pub mod piecewise;
pub mod quadratic;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{dense_spectral_norm, Matrix, Vector};
use crate::oracle::{ProxOracle, SmoothOracle};
use crate::solvers::Reference;

pub use instance::{generate_instance, InstanceKind, InstanceSpec};
pub use lasso::{make_l1l2, make_lasso};
pub use least_squares::LeastSquares;
pub use logistic::{make_logistic, Logistic, LogisticSpec};
pub use mspbe::make_mspbe;
pub use piecewise::{make_piecewise, Piecewise, PiecewiseSpec};
pub use quadratic::{make_quadratic, Quadratic, QuadraticSpec};

/// `min f(x)` with a smooth oracle.
#[derive(Clone)]
pub struct SmoothProblem {
    pub oracle: Arc<dyn SmoothOracle>,
    pub reference: Option<Reference>,
}

/// `min f(x) + g(x)` with `f` smooth and `g` given by its proximal map.
#[derive(Clone)]
pub struct CompositeProblem {
    pub f: Arc<dyn SmoothOracle>,
    pub g: Arc<dyn ProxOracle>,
    pub reference: Option<Reference>,
}

impl CompositeProblem {
    pub fn new(f: Arc<dyn SmoothOracle>, g: Arc<dyn ProxOracle>) -> Result<Self> {
        if f.dim() != g.dim() {
            return Err(Error::Construction(format!(
                "smooth part has dimension {}, nonsmooth part {}",
                f.dim(),
                g.dim()
            )));
        }
        Ok(Self { f, g, reference: None })
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    /// `f(x) + g(x)` when `g` can be evaluated.
    pub fn objective(&self, x: &Vector) -> Option<f64> {
        self.g.value(x).map(|gv| self.f.value(x) + gv)
    }
}

/// Known saddle point `(u*, p*)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SaddleReference {
    pub u: Vector,
    pub p: Vector,
    pub self_consistent: bool,
}

impl SaddleReference {
    pub fn as_reference(&self) -> Reference {
        Reference {
            point: crate::flow::concat(&[&self.u, &self.p]),
            value: None,
            self_consistent: self.self_consistent,
        }
    }
}

/// `min_u max_p f(u) − g(p) + ⟨Bu, p⟩` with `B` of size `n × m`.
#[derive(Clone)]
pub struct SaddleProblem {
    pub f: Arc<dyn SmoothOracle>,
    pub g: Arc<dyn SmoothOracle>,
    pub b: Matrix,
    pub b_norm: f64,
    pub reference: Option<SaddleReference>,
}

impl SaddleProblem {
    /// Validates dimensions and strong convexity; `‖B‖` comes from a dense
    /// eigensolve on the smaller Gram matrix.
    pub fn new(f: Arc<dyn SmoothOracle>, g: Arc<dyn SmoothOracle>, b: Matrix) -> Result<Self> {
        if b.ncols() != f.dim() || b.nrows() != g.dim() {
            return Err(Error::Construction(format!(
                "B is {}x{} but f has dimension {} and g has dimension {}",
                b.nrows(),
                b.ncols(),
                f.dim(),
                g.dim()
            )));
        }
        if !(f.mu() > 0.0 && g.mu() > 0.0) {
            return Err(Error::Construction("saddle problems need μ_f, μ_g > 0".into()));
        }
        let b_norm = dense_spectral_norm(&b);
        Ok(Self { f, g, b, b_norm, reference: None })
    }

    /// Dimension of `u`.
    pub fn m(&self) -> usize {
        self.f.dim()
    }

    /// Dimension of `p`.
    pub fn n(&self) -> usize {
        self.g.dim()
    }

    /// `f(u) − g(p) + ⟨Bu, p⟩`.
    pub fn lagrangian(&self, u: &Vector, p: &Vector) -> f64 {
        self.f.value(u) - self.g.value(p) + (&self.b * u).dot(p)
    }

    /// `F(u, p) = (∇f(u) + Bᵀp, ∇g(p) − Bu)`.
    pub fn operator(&self, u: &Vector, p: &Vector) -> (Vector, Vector) {
        (self.f.gradient(u) + self.b.tr_mul(p), self.g.gradient(p) - &self.b * u)
    }

    /// [`Self::operator`] on a stacked point `(u, p)`.
    pub fn operator_stacked(&self, z: &Vector) -> Vector {
        let (m, n) = (self.m(), self.n());
        let (a, b) = self.operator(&z.rows(0, m).into_owned(), &z.rows(m, n).into_owned());
        crate::flow::concat(&[&a, &b])
    }

    /// `‖F(u, p)‖`, zero exactly at the saddle point.
    pub fn kkt_residual(&self, u: &Vector, p: &Vector) -> f64 {
        let (a, b) = self.operator(u, p);
        (a.norm_squared() + b.norm_squared()).sqrt()
    }

    pub fn mu_min(&self) -> f64 {
        self.f.mu().min(self.g.mu())
    }
}

/// Any problem the zoo can produce.
#[derive(Clone)]
pub enum Problem {
    Smooth(SmoothProblem),
    Composite(CompositeProblem),
    Saddle(SaddleProblem),
}

impl Problem {
    pub fn class(&self) -> &'static str {
        match self {
            Problem::Smooth(_) => "smooth",
            Problem::Composite(_) => "composite",
            Problem::Saddle(_) => "saddle",
        }
    }
}
