use thiserror::Error;

/// Errors raised by the discretization, the nonlinear solvers and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cell index {index} out of range for a grid with {count} cells")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("axis {axis} is Dirichlet but the problem supplies no boundary value")]
    MissingBoundaryValue { axis: usize },

    #[error("problem `{0}` has no exact solution at the requested time")]
    NoExactSolution(String),

    #[error("singular matrix encountered in {0}")]
    SingularMatrix(&'static str),

    #[error("{solver} did not converge: {iterations} iterations, residual {residual:.3e} > {tolerance:.1e}")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("limiter precondition violated: {0}")]
    LimiterPrecondition(String),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used on the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::IndexOutOfRange { .. } => "index-out-of-range",
            Error::MissingBoundaryValue { .. } => "missing-boundary-value",
            Error::NoExactSolution(_) => "no-exact-solution",
            Error::SingularMatrix(_) => "singular-matrix",
            Error::NotConverged { .. } => "not-converged",
            Error::LimiterPrecondition(_) => "limiter-precondition",
            Error::UnknownName { .. } => "unknown-name",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
