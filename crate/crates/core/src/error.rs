use thiserror::Error;

/// Errors raised by oracles, solvers and diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A function value, gradient or iterate stopped being finite.
    #[error("non-finite value in {op} at iteration {iter}")]
    NonFinite { op: &'static str, iter: usize },

    /// A solver whose divergence is treated as a failure produced a non-finite iterate.
    #[error("{solver} diverged at iteration {iter}")]
    Divergence { solver: &'static str, iter: usize },

    /// An ODE integration produced a non-finite state.
    #[error("flow integration produced a non-finite state at step {step}")]
    Integration { step: usize },

    /// A problem could not be built from the given data.
    #[error("construction failed: {0}")]
    Construction(String),

    /// Arguments violate a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The numeric proximal solver ran out of budget.
    #[error("proximal subproblem did not reach tolerance (best residual {best_residual:e})")]
    Prox { best_residual: f64 },

    /// An inner linear solve missed its residual target.
    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    Solve { residual: f64, tolerance: f64 },

    /// A Lyapunov value left the range the theory guarantees; signals a bug.
    #[error("certificate integrity violated: {0}")]
    CertificateIntegrity(String),

    /// Not enough data to compute a diagnostic.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Parsing of a text specification failed.
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
