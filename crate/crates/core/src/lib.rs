//! Accelerated over-relaxation heavy-ball (AOR-HB) methods for smooth,
//! composite and bilinear saddle-point problems, together with the problem
//! instances they are benchmarked on and Lyapunov-based convergence
//! certificates.
//!
//! ```
//! use aorhb_core::prelude::*;
//!
//! let f = generate_instance(InstanceKind::Quadratic, &[20], 100.0, 7).unwrap();
//! let Problem::Smooth(p) = f else { unreachable!() };
//! let x0 = Vector::from_element(20, 1.0);
//! let cfg = SolverConfig::new(2000)
//!     .with_reference(p.reference.clone().unwrap())
//!     .with_error_tolerance(1e-8);
//! let trace = aor_hb_two_var(p.oracle.as_ref(), &x0, &x0, &cfg).unwrap();
//! assert_eq!(trace.termination, Termination::ErrorTolerance);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod linalg;
pub mod oracle;
pub mod prox;
pub mod solvers;
pub mod zoo;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};

/// The types most programs need.
pub mod prelude {
    pub use crate::diagnostics::{
        certify_decay, certify_decay_with, fit_iteration_scaling, lyapunov_e, lyapunov_e_alpha, lyapunov_saddle,
        CertifyOptions, RateCertificate, SaddleState,
    };
    pub use crate::error::{Error, Result};
    pub use crate::linalg::{Matrix, Vector};
    pub use crate::oracle::{ProxOracle, SmoothOracle};
    pub use crate::solvers::*;
    pub use crate::zoo::{
        generate_instance, CompositeProblem, InstanceKind, InstanceSpec, Problem, SaddleProblem, SmoothProblem,
    };
}
