use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chain specification: {0}")]
    InvalidSpec(String),

    #[error("{what} {value} out of range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },

    #[error("Hilbert space dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: u128, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error(
        "revival system is degenerate (condition estimate {condition:.3e}); \
         this can happen for free or integrable dynamics"
    )]
    Degenerate { condition: f64 },

    #[error("drive amplitude d must be nonzero: d = 0 only admits the trivial solution A = 0")]
    ZeroDrive,

    #[error("Hamiltonian does not commute with the translation operator (residual {residual:.3e})")]
    Symmetry { residual: f64 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("linear fit is degenerate: {0}")]
    Fit(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("malformed {format} input: {message}")]
    Format { format: &'static str, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(format: &'static str, message: impl Into<String>) -> Self {
        Error::Format {
            format,
            message: message.into(),
        }
    }
}
