use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature subdivision budget exhausted (best estimate {estimate}, error estimate {error_estimate})")]
    BudgetExceeded { estimate: f64, error_estimate: f64 },

    #[error("integrand returned a non-finite value at x = {0}")]
    InvalidIntegrand(f64),

    #[error("optimization failed: {0}")]
    OptimizationFailed(String),

    #[error("curvature error: {0}")]
    CurvatureError(String),

    #[error("evaluation failed: {0}")]
    EvaluationFailed(String),

    #[error("fitting failed: {0}")]
    FittingFailed(String),

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("degenerate spread: median absolute deviation is zero")]
    DegenerateSpread,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("schema error: {0}")]
    SchemaError(String),

    #[error("parse error at row {row}: {message}")]
    ParseError { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::SchemaError(e.to_string())
    }
}

/// Coarse classification used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Caller passed something unusable (exit code 2).
    Usage,
    /// A numerical routine failed (exit code 3).
    Numerical,
    /// The input data is unusable (exit code 4).
    Data,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidArgument(_) => ErrorCategory::Usage,
            Error::BudgetExceeded { .. }
            | Error::InvalidIntegrand(_)
            | Error::OptimizationFailed(_)
            | Error::CurvatureError(_)
            | Error::EvaluationFailed(_)
            | Error::FittingFailed(_)
            | Error::OutOfDomain(_) => ErrorCategory::Numerical,
            Error::DegenerateData(_)
            | Error::DegenerateSpread
            | Error::InsufficientData(_)
            | Error::SchemaError(_)
            | Error::ParseError { .. }
            | Error::Io(_)
            | Error::Serialize(_) => ErrorCategory::Data,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.category() {
            ErrorCategory::Usage => 2,
            ErrorCategory::Numerical => 3,
            ErrorCategory::Data => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
