//! Continuous-time models behind the methods and a fixed-step RK4 integrator.
//!
//! State layouts: heavy-ball flow `[x; x′]`, AGD flow `[x; y]`, saddle flow
//! `[u; v; p; q]`.

use crate::error::{Error, Result};
use crate::linalg::{all_finite, Vector};
use crate::oracle::SmoothOracle;
use crate::zoo::SaddleProblem;

#[derive(Clone, Copy)]
pub enum Flow<'a> {
    /// `x″ + θx′ + η∇f(x) = 0`.
    HeavyBall { oracle: &'a dyn SmoothOracle, theta: f64, eta: f64 },
    /// `x′ = y − x`, `y′ = x − y − ∇f(x)/μ`.
    Agd { oracle: &'a dyn SmoothOracle },
    /// Saddle analogue of the AGD flow for `f(u) − g(p) + ⟨Bu, p⟩`.
    Saddle { problem: &'a SaddleProblem },
}

impl Flow<'_> {
    pub fn state_dim(&self) -> usize {
        match self {
            Flow::HeavyBall { oracle, .. } | Flow::Agd { oracle } => 2 * oracle.dim(),
            Flow::Saddle { problem } => 2 * (problem.m() + problem.n()),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Flow::HeavyBall { theta, eta, .. } => {
                if !(*theta > 0.0 && *eta > 0.0) {
                    return Err(Error::InvalidInput("heavy-ball flow needs θ > 0 and η > 0".into()));
                }
            }
            Flow::Agd { oracle } => {
                if !(oracle.mu() > 0.0) {
                    return Err(Error::InvalidInput("AGD flow divides by μ; μ must be positive".into()));
                }
            }
            Flow::Saddle { problem } => {
                if !(problem.f.mu() > 0.0 && problem.g.mu() > 0.0) {
                    return Err(Error::InvalidInput("saddle flow needs μ_f, μ_g > 0".into()));
                }
            }
        }
        Ok(())
    }

    /// Vector field `G(z)`.
    pub fn rhs(&self, z: &Vector) -> Vector {
        match self {
            Flow::HeavyBall { oracle, theta, eta } => {
                let d = oracle.dim();
                let x = z.rows(0, d).into_owned();
                let v = z.rows(d, d).into_owned();
                let a = -(&v * *theta) - oracle.gradient(&x) * *eta;
                concat(&[&v, &a])
            }
            Flow::Agd { oracle } => {
                let d = oracle.dim();
                let x = z.rows(0, d).into_owned();
                let y = z.rows(d, d).into_owned();
                let dx = &y - &x;
                let dy = &x - &y - oracle.gradient(&x) / oracle.mu();
                concat(&[&dx, &dy])
            }
            Flow::Saddle { problem } => {
                let (m, n) = (problem.m(), problem.n());
                let u = z.rows(0, m).into_owned();
                let v = z.rows(m, m).into_owned();
                let p = z.rows(2 * m, n).into_owned();
                let q = z.rows(2 * m + n, n).into_owned();
                let du = &v - &u;
                let dv = &u - &v - (problem.f.gradient(&u) + problem.b.tr_mul(&q)) / problem.f.mu();
                let dp = &q - &p;
                let dq = &p - &q - (problem.g.gradient(&p) - &problem.b * &v) / problem.g.mu();
                concat(&[&du, &dv, &dp, &dq])
            }
        }
    }
}

pub(crate) fn concat(parts: &[&Vector]) -> Vector {
    let len = parts.iter().map(|p| p.len()).sum();
    let mut out = Vector::zeros(len);
    let mut at = 0;
    for p in parts {
        out.rows_mut(at, p.len()).copy_from(*p);
        at += p.len();
    }
    out
}

/// Classical RK4 trajectory `z₀, z₁, …, z_steps`.
pub fn integrate_flow(flow: &Flow<'_>, z0: &Vector, dt: f64, steps: usize) -> Result<Vec<Vector>> {
    flow.validate()?;
    if !(dt > 0.0) || steps == 0 {
        return Err(Error::InvalidInput("need dt > 0 and at least one step".into()));
    }
    if z0.len() != flow.state_dim() {
        return Err(Error::InvalidInput(format!(
            "state has length {}, flow expects {}",
            z0.len(),
            flow.state_dim()
        )));
    }
    let mut traj = Vec::with_capacity(steps + 1);
    traj.push(z0.clone());
    let mut z = z0.clone();
    for step in 1..=steps {
        let k1 = flow.rhs(&z);
        let k2 = flow.rhs(&(&z + &k1 * (0.5 * dt)));
        let k3 = flow.rhs(&(&z + &k2 * (0.5 * dt)));
        let k4 = flow.rhs(&(&z + &k3 * dt));
        z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        if !all_finite(&z) {
            return Err(Error::Integration { step });
        }
        traj.push(z.clone());
    }
    Ok(traj)
}
