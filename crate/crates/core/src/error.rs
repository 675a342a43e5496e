use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value encountered in {0}")]
    NonFiniteValue(String),

    #[error("{context} did not converge (final residual {residual:e})")]
    NotConverged { context: String, residual: f64 },

    #[error("dimension {dim} exceeds the dense limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("bad shape: {0}")]
    BadShape(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("unsupported likelihood family: {0}")]
    UnsupportedFamily(String),

    #[error("bad data: {0}")]
    BadData(String),

    #[error("line search failed after {halvings} halvings")]
    LineSearchFailed { halvings: usize },

    #[error("aborted: {0}")]
    Aborted(String),

    #[error("unknown example: {0}")]
    UnknownExample(String),

    #[error("unknown method: {0}")]
    UnknownMethod(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("density is not normalizable on the grid")]
    NonNormalizable,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn mismatch(context: impl Into<String>, expected: usize, got: usize) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected,
            got,
        }
    }

    /// Short machine-readable tag, used in error records written by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonFiniteValue(_) => "NonFiniteValue",
            Error::NotConverged { .. } => "NotConverged",
            Error::DimensionTooLarge { .. } => "DimensionTooLarge",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::BadShape(_) => "BadShape",
            Error::DomainError(_) => "DomainError",
            Error::UnsupportedFamily(_) => "UnsupportedFamily",
            Error::BadData(_) => "BadData",
            Error::LineSearchFailed { .. } => "LineSearchFailed",
            Error::Aborted(_) => "Aborted",
            Error::UnknownExample(_) => "UnknownExample",
            Error::UnknownMethod(_) => "UnknownMethod",
            Error::GridMismatch(_) => "GridMismatch",
            Error::NonNormalizable => "NonNormalizable",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
        }
    }
}
