use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("requested {requested} samples from a dataset of {available} points")]
    TooManyRequested { requested: usize, available: usize },

    #[error("blue-noise radius search failed: {0}")]
    RadiusSearch(String),

    #[error("could not reach {target} samples within tolerance {tolerance} (best {best})")]
    RateTolerance {
        target: usize,
        best: usize,
        tolerance: f64,
    },

    #[error("index {index} out of range for dataset of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("post-hoc test requires a significant omnibus result (p = {p_value:.4} >= alpha = {alpha})")]
    GateNotSatisfied { p_value: f64, alpha: f64 },

    #[error("could not place question regions: {0}")]
    QuestionPlacement(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
