//! Oracle abstractions: smooth functions with certified constants, proximal
//! maps, and the gradient/Bregman checks every oracle is expected to pass.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::diagnostics::bregman;
use crate::error::{Error, Result};
use crate::linalg::Vector;

/// Black-box access to a convex, `L`-smooth function with strong-convexity
/// modulus `μ` (possibly 0).
pub trait SmoothOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
    fn mu(&self) -> f64;
    fn lipschitz(&self) -> f64;

    /// `D_f(y, x)` computed without cancellation, when the function admits it.
    fn bregman_closed_form(&self, _y: &Vector, _x: &Vector) -> Option<f64> {
        None
    }

    fn condition_number(&self) -> f64 {
        if self.mu() > 0.0 {
            self.lipschitz() / self.mu()
        } else {
            f64::INFINITY
        }
    }
}

impl<T: SmoothOracle + ?Sized> SmoothOracle for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        (**self).gradient(x)
    }
    fn mu(&self) -> f64 {
        (**self).mu()
    }
    fn lipschitz(&self) -> f64 {
        (**self).lipschitz()
    }
    fn bregman_closed_form(&self, y: &Vector, x: &Vector) -> Option<f64> {
        (**self).bregman_closed_form(y, x)
    }
}

/// Wraps an oracle and counts value and gradient evaluations.
pub struct CountingOracle<O> {
    inner: O,
    values: AtomicUsize,
    gradients: AtomicUsize,
}

impl<O: SmoothOracle> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, values: AtomicUsize::new(0), gradients: AtomicUsize::new(0) }
    }

    pub fn gradient_calls(&self) -> usize {
        self.gradients.load(Ordering::Relaxed)
    }

    pub fn value_calls(&self) -> usize {
        self.values.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.values.store(0, Ordering::Relaxed);
        self.gradients.store(0, Ordering::Relaxed);
    }
}

impl<O: SmoothOracle> SmoothOracle for CountingOracle<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.values.fetch_add(1, Ordering::Relaxed);
        self.inner.value(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        self.gradients.fetch_add(1, Ordering::Relaxed);
        self.inner.gradient(x)
    }
    fn mu(&self) -> f64 {
        self.inner.mu()
    }
    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz()
    }
    fn bregman_closed_form(&self, y: &Vector, x: &Vector) -> Option<f64> {
        self.inner.bregman_closed_form(y, x)
    }
}

/// Proximal map of a (possibly non-convex) function `g`.
pub trait ProxOracle: Send + Sync {
    fn dim(&self) -> usize;
    /// `argmin_y g(y) + ‖y − x‖² / (2λ)`.
    fn prox(&self, x: &Vector, lambda: f64) -> Result<Vector>;
    fn value(&self, _x: &Vector) -> Option<f64> {
        None
    }
    fn is_convex(&self) -> bool {
        true
    }
}

/// Default finite-difference step for a probe at `x`.
pub fn default_fd_step(x: &Vector) -> f64 {
    1e-6 * (1.0 + x.norm())
}

/// Central-difference gradient `(f(x + h eᵢ) − f(x − h eᵢ)) / 2h`.
pub fn finite_difference_gradient<O: SmoothOracle + ?Sized>(
    oracle: &O,
    x: &Vector,
    h: f64,
) -> Result<Vector> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("step h must be positive, got {h}")));
    }
    if x.len() != oracle.dim() {
        return Err(Error::InvalidInput(format!(
            "point has length {}, oracle dimension is {}",
            x.len(),
            oracle.dim()
        )));
    }
    let mut probe = x.clone();
    let mut out = Vector::zeros(x.len());
    for i in 0..x.len() {
        let xi = probe[i];
        probe[i] = xi + h;
        let fp = oracle.value(&probe);
        probe[i] = xi - h;
        let fm = oracle.value(&probe);
        probe[i] = xi;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::NonFinite { op: "finite_difference_gradient", iter: i });
        }
        out[i] = (fp - fm) / (2.0 * h);
    }
    Ok(out)
}

/// Relative gap `‖∇f(x) − ∇_h f(x)‖ / max(‖∇f(x)‖, 1)` between the analytic
/// and the central-difference gradient.
pub fn gradient_check<O: SmoothOracle + ?Sized>(oracle: &O, x: &Vector) -> Result<f64> {
    let fd = finite_difference_gradient(oracle, x, default_fd_step(x))?;
    let g = oracle.gradient(x);
    Ok((&g - &fd).norm() / g.norm().max(1.0))
}

/// Slacks (right side minus left side) of the eight two-sided Bregman bounds
/// for a `μ`-strongly convex, `L`-smooth function. Bounds that divide by
/// `μ = 0` are reported as `+∞`.
pub fn bregman_bound_slacks<O: SmoothOracle + ?Sized>(oracle: &O, x: &Vector, y: &Vector) -> [f64; 8] {
    let (mu, l) = (oracle.mu(), oracle.lipschitz());
    let d = bregman(oracle, y, x);
    let dx2 = (x - y).norm_squared();
    let dg2 = (oracle.gradient(x) - oracle.gradient(y)).norm_squared();
    let sym = bregman(oracle, y, x) + bregman(oracle, x, y);
    let inv_mu = |v: f64| if mu > 0.0 { v / mu } else { f64::INFINITY };
    [
        d - 0.5 * mu * dx2,
        0.5 * l * dx2 - d,
        d - dg2 / (2.0 * l),
        inv_mu(0.5 * dg2) - d,
        sym - mu * dx2,
        l * dx2 - sym,
        sym - dg2 / l,
        inv_mu(dg2) - sym,
    ]
}

/// Residual `⟨∇f(y) − ∇f(x), y − z⟩ − (D(z,y) + D(y,x) − D(z,x))`.
pub fn three_point_residual<O: SmoothOracle + ?Sized>(oracle: &O, x: &Vector, y: &Vector, z: &Vector) -> f64 {
    let lhs = (oracle.gradient(y) - oracle.gradient(x)).dot(&(y - z));
    let rhs = bregman(oracle, z, y) + bregman(oracle, y, x) - bregman(oracle, z, x);
    lhs - rhs
}
