use thiserror::Error;

/// Errors raised by the solver, the discrete operators and the checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("scalar weight v must be positive at interior node {node} (got {value})")]
    DegenerateWeight { node: usize, value: f64 },

    #[error("invalid weight field: {0}")]
    InvalidField(String),

    #[error("matrix at cell {cell} is singular; negative powers are undefined")]
    SingularMatrix { cell: usize },

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid function does not vanish on boundary node {node}")]
    BoundaryViolation { node: usize },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("inner solver did not converge{}: residual {residual:e} after {iterations} iterations", step_suffix(*.step))]
    NonConvergence {
        residual: f64,
        iterations: usize,
        step: Option<usize>,
    },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("time {t} outside [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },

    #[error("incompatible trajectories: {0}")]
    IncompatibleTrajectories(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid run: {0}")]
    InvalidRun(String),

    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn step_suffix(step: Option<usize>) -> String {
    match step {
        Some(k) => format!(" at step {k}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
