use thiserror::Error;

/// Errors produced by the affine-process toolkit.
///
/// Each variant maps onto one process exit code of the `affine` binary
/// (see [`AffineError::exit_code`]).
#[derive(Debug, Clone, Error, PartialEq)]
pub enum AffineError {
    /// Matrix or vector shapes do not match the declared dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The parameter set failed one or more admissibility conditions.
    #[error("parameters are not admissible: {0}")]
    Inadmissible(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The model file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// The adaptive integrator could not make progress.
    #[error("solver failure at t = {t_reached}: {reason}")]
    SolverFailure { t_reached: f64, reason: String },

    /// The real part of an I-coordinate of psi left the closed left half-plane.
    #[error("psi left the transform domain at t = {t}: Re psi_{index} = {value:e}")]
    DomainViolation { t: f64, index: usize, value: f64 },

    /// The adaptive stationary horizon hit its cap without meeting the tolerance.
    #[error("no convergence within horizon {horizon}: tail bound {tail_bound:e} > {tol:e}")]
    NonConvergence { horizon: f64, tail_bound: f64, tol: f64 },

    /// A hypothesis for convergence to the limiting distribution fails.
    #[error("ergodicity hypothesis fails: {}", reasons.join(", "))]
    NotErgodic { reasons: Vec<String> },

    /// The model uses a feature an operation does not support.
    #[error("unsupported model: {0}")]
    Unsupported(String),

    /// The input data is not usable (for example a CF with cf(0) != 1).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The operation is degenerate for this input.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A state lies outside the region where the Lyapunov function has its exact form.
    #[error("state outside the exact-form region: {0}")]
    OutOfRegion(String),
}

impl AffineError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            AffineError::Inadmissible(_) => 1,
            AffineError::Parse(_) | AffineError::Dimension(_) => 2,
            AffineError::NotErgodic { .. } => 4,
            AffineError::Unsupported(_) => 5,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, AffineError>;
