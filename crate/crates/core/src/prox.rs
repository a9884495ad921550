//! Proximal operators: closed forms for the ℓ1 and ℓ1−ℓ2 penalties, a
//! derivative-free numeric fallback, and a small registry.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::oracle::ProxOracle;

/// Soft threshold `sign(xᵢ)·max(|xᵢ| − t, 0)` with `t = lambda·weight`.
pub fn prox_l1(x: &Vector, lambda: f64, weight: f64) -> Vector {
    let t = lambda * weight;
    x.map(|xi| xi.signum() * (xi.abs() - t).max(0.0))
}

/// Proximal map of `weight·(‖y‖₁ − ‖y‖₂)` with step `lambda`.
///
/// With `t = lambda·weight`:
/// * `‖x‖∞ > t`: `z = S_t(x)` and the result is `z(‖z‖ + t)/‖z‖`;
/// * `0 < ‖x‖∞ ≤ t`: the minimizers are 1-sparse and keep the largest-magnitude
///   entry of `x` unchanged (lowest index on ties);
/// * `x = 0`: 0.
pub fn prox_l1_minus_l2(x: &Vector, lambda: f64, weight: f64) -> Vector {
    let t = lambda * weight;
    let (imax, amax) = x
        .iter()
        .enumerate()
        .fold((0, 0.0_f64), |(bi, bv), (i, &v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) });
    if amax == 0.0 {
        return Vector::zeros(x.len());
    }
    if amax > t {
        let z = prox_l1(x, lambda, weight);
        let nz = z.norm();
        return &z * ((nz + t) / nz);
    }
    let mut out = Vector::zeros(x.len());
    out[imax] = x[imax];
    out
}

/// `g(y) + ‖y − x‖² / (2λ)`.
pub fn prox_objective<G: Fn(&Vector) -> f64 + ?Sized>(g: &G, x: &Vector, y: &Vector, lambda: f64) -> f64 {
    g(y) + (y - x).norm_squared() / (2.0 * lambda)
}

/// Budget for [`prox_numeric`], in objective evaluations.
pub const NUMERIC_PROX_BUDGET: usize = 2_000_000;

/// Minimizes `g(y) + ‖y − x‖²/(2λ)` by multi-start compass search.
///
/// Starts from `x`, the origin and every 1-sparse truncation of `x`; polls
/// the coordinate directions (plus all pairwise diagonals in low dimension),
/// halving the mesh after an unsuccessful poll. The returned point's
/// optimality residual is the final mesh size, which must reach `tol`.
pub fn prox_numeric<G: Fn(&Vector) -> f64 + ?Sized>(g: &G, x: &Vector, lambda: f64, tol: f64) -> Result<Vector> {
    prox_numeric_with_budget(g, x, lambda, tol, NUMERIC_PROX_BUDGET)
}

/// [`prox_numeric`] with an explicit evaluation budget.
pub fn prox_numeric_with_budget<G: Fn(&Vector) -> f64 + ?Sized>(
    g: &G,
    x: &Vector,
    lambda: f64,
    tol: f64,
    budget: usize,
) -> Result<Vector> {
    if !(lambda > 0.0 && tol > 0.0) {
        return Err(Error::InvalidInput("prox_numeric needs lambda > 0 and tol > 0".into()));
    }
    let d = x.len();
    if d == 0 {
        return Ok(Vector::zeros(0));
    }
    let phi = |y: &Vector| prox_objective(g, x, y, lambda);
    let dirs = poll_directions(d);

    let mut starts = vec![x.clone(), Vector::zeros(d)];
    for i in 0..d {
        let mut s = Vector::zeros(d);
        s[i] = x[i];
        starts.push(s);
    }

    let mut evals = 0usize;
    let mut best: Option<(f64, Vector, f64)> = None;
    let scale = x.amax().max(lambda).max(1e-3);
    for start in starts {
        let (val, y, mesh) = compass(&phi, start, &dirs, scale, tol, budget, &mut evals);
        let better = match &best {
            None => true,
            Some((bv, by, _)) => val < *bv || (val == *bv && lex_less(&y, by)),
        };
        if better {
            best = Some((val, y, mesh));
        }
    }
    let (_, y, mesh) = best.expect("at least one start");
    if mesh > tol {
        return Err(Error::Prox { best_residual: mesh });
    }
    Ok(y)
}

fn lex_less(a: &Vector, b: &Vector) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if x != y {
            return x < y;
        }
    }
    false
}

fn poll_directions(d: usize) -> Vec<Vector> {
    let mut dirs = Vec::new();
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = Vector::zeros(d);
            e[i] = s;
            dirs.push(e);
        }
    }
    if d <= 16 {
        for i in 0..d {
            for j in (i + 1)..d {
                for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    let mut e = Vector::zeros(d);
                    e[i] = si;
                    e[j] = sj;
                    dirs.push(e);
                }
            }
        }
    }
    dirs
}

fn compass<F: Fn(&Vector) -> f64>(
    phi: &F,
    mut y: Vector,
    dirs: &[Vector],
    scale: f64,
    tol: f64,
    budget: usize,
    evals: &mut usize,
) -> (f64, Vector, f64) {
    let mut fy = phi(&y);
    let mut mesh = scale;
    while mesh > tol && *evals < budget {
        let mut improved = false;
        for dir in dirs {
            let cand = &y + dir * mesh;
            *evals += 1;
            let fc = phi(&cand);
            if fc < fy {
                y = cand;
                fy = fc;
                improved = true;
                break;
            }
        }
        if !improved {
            mesh *= 0.5;
        }
    }
    (fy, y, mesh)
}

/// `g = 0`.
pub struct ZeroProx {
    pub dim: usize,
}

impl ProxOracle for ZeroProx {
    fn dim(&self) -> usize {
        self.dim
    }
    fn prox(&self, x: &Vector, _lambda: f64) -> Result<Vector> {
        Ok(x.clone())
    }
    fn value(&self, _x: &Vector) -> Option<f64> {
        Some(0.0)
    }
}

/// `g = weight·‖·‖₁`.
pub struct L1Prox {
    pub dim: usize,
    pub weight: f64,
}

impl ProxOracle for L1Prox {
    fn dim(&self) -> usize {
        self.dim
    }
    fn prox(&self, x: &Vector, lambda: f64) -> Result<Vector> {
        Ok(prox_l1(x, lambda, self.weight))
    }
    fn value(&self, x: &Vector) -> Option<f64> {
        Some(self.weight * x.lp_norm(1))
    }
}

/// `g = weight·(‖·‖₁ − ‖·‖₂)`; non-convex.
pub struct L1MinusL2Prox {
    pub dim: usize,
    pub weight: f64,
}

impl ProxOracle for L1MinusL2Prox {
    fn dim(&self) -> usize {
        self.dim
    }
    fn prox(&self, x: &Vector, lambda: f64) -> Result<Vector> {
        Ok(prox_l1_minus_l2(x, lambda, self.weight))
    }
    fn value(&self, x: &Vector) -> Option<f64> {
        Some(self.weight * (x.lp_norm(1) - x.norm()))
    }
    fn is_convex(&self) -> bool {
        false
    }
}

/// `g = (weight/2)‖·‖²`.
pub struct SquaredNormProx {
    pub dim: usize,
    pub weight: f64,
}

impl ProxOracle for SquaredNormProx {
    fn dim(&self) -> usize {
        self.dim
    }
    fn prox(&self, x: &Vector, lambda: f64) -> Result<Vector> {
        Ok(x / (1.0 + lambda * self.weight))
    }
    fn value(&self, x: &Vector) -> Option<f64> {
        Some(0.5 * self.weight * x.norm_squared())
    }
}

pub type ValueFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;

/// Any `g` given by its values, proxed with [`prox_numeric`].
pub struct NumericProx {
    pub dim: usize,
    pub g: ValueFn,
    pub convex: bool,
    pub tol: f64,
}

impl ProxOracle for NumericProx {
    fn dim(&self) -> usize {
        self.dim
    }
    fn prox(&self, x: &Vector, lambda: f64) -> Result<Vector> {
        prox_numeric(self.g.as_ref(), x, lambda, self.tol)
    }
    fn value(&self, x: &Vector) -> Option<f64> {
        Some((self.g)(x))
    }
    fn is_convex(&self) -> bool {
        self.convex
    }
}

#[derive(Clone)]
pub struct ProxRegistryEntry {
    pub name: &'static str,
    pub convex: bool,
    pub prox: Arc<dyn ProxOracle>,
}

/// Named proximal operators, immutable once built.
#[derive(Clone)]
pub struct ProxRegistry {
    entries: Vec<ProxRegistryEntry>,
}

impl ProxRegistry {
    /// `zero`, `l1`, `l1_minus_l2` and `squared_norm` with the given weight.
    pub fn standard(dim: usize, weight: f64) -> Self {
        let entries = vec![
            ProxRegistryEntry { name: "zero", convex: true, prox: Arc::new(ZeroProx { dim }) },
            ProxRegistryEntry { name: "l1", convex: true, prox: Arc::new(L1Prox { dim, weight }) },
            ProxRegistryEntry { name: "l1_minus_l2", convex: false, prox: Arc::new(L1MinusL2Prox { dim, weight }) },
            ProxRegistryEntry { name: "squared_norm", convex: true, prox: Arc::new(SquaredNormProx { dim, weight }) },
        ];
        Self { entries }
    }

    pub fn with(mut self, entry: ProxRegistryEntry) -> Self {
        self.entries.push(entry);
        self
    }

    pub fn get(&self, name: &str) -> Option<&ProxRegistryEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn entries(&self) -> &[ProxRegistryEntry] {
        &self.entries
    }
}
