use thiserror::Error;

/// Errors raised by the analysis routines.
///
/// `Validation` covers malformed inputs (bad specs, out-of-range parameters);
/// `InvariantBreach` is reserved for internal consistency failures that
/// indicate a bug, such as an aperiodicity certificate disagreeing with the
/// graph period.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("frequency {requested} is outside the representable range (|n| <= {bound})")]
    OutOfRange { requested: i64, bound: i64 },

    #[error("convexity violated at index {index}: second difference {value:e}")]
    ConvexityViolation { index: usize, value: f64 },

    #[error("invariant breach: {0}")]
    InvariantBreach(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn breach(msg: impl Into<String>) -> Self {
        Error::InvariantBreach(msg.into())
    }
}
