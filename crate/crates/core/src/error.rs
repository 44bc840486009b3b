use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing column {0:?} in header")]
    MissingColumn(String),

    #[error("duplicate date {date} at line {line}")]
    DuplicateDate { line: usize, date: String },

    #[error("non-positive value {value} at index {index}")]
    NonPositive { index: usize, value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("value overflow at step {step} of realization {realization}")]
    Overflow { realization: u64, step: usize },

    #[error(
        "power-law MLE has no interior maximum in [{lower}, {upper}] \
         (score {score_lower:.3e} .. {score_upper:.3e}); pinned at {pinned_alpha}"
    )]
    PowerLawNotConverged {
        lower: f64,
        upper: f64,
        score_lower: f64,
        score_upper: f64,
        pinned_alpha: f64,
    },

    #[error("GEV fit did not converge after {iterations} iterations: {reason}")]
    GevNotConverged { iterations: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
