use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("matrix exponential overflow (1-norm {norm:.3e})")]
    Overflow { norm: f64 },

    #[error("degenerate spectrum: eigenvector condition estimate {cond:.3e}")]
    DegenerateSpectrum { cond: f64 },

    #[error("ill-conditioned matrix: condition estimate {cond:.3e}")]
    IllConditioned { cond: f64 },

    #[error("singular matrix")]
    Singular,

    #[error("tau vanishes (|tau| = {value:.3e})")]
    SingularTau { value: f64 },

    #[error("eigenvalue collision: separation {separation:.3e}")]
    Collision { separation: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid time vector: {0}")]
    InvalidTime(String),

    #[error("field `{field}`: {message}")]
    Format { field: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn format(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            field: field.into(),
            message: message.into(),
        }
    }
}
