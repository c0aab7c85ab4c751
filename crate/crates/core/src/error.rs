use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial degree {requested} exceeds the configured maximum {max}")]
    DegreeOverflow { requested: usize, max: usize },

    #[error("point {point} lies outside the interval [{start}, {end}]")]
    Domain { point: f64, start: f64, end: f64 },

    #[error("invalid interval: end {end} must be greater than start {start}")]
    InvalidInterval { start: f64, end: f64 },

    #[error("invalid integral spec: {0}")]
    InvalidSpec(String),

    #[error("coefficient tensor does not match: {0}")]
    TensorMismatch(String),

    #[error("coefficient table, line {line}: {message}")]
    TableParse { line: usize, message: String },

    #[error("coefficient table is missing the entry for index {index:?}")]
    MissingEntry { index: Vec<usize> },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no truncation level given for family {0}")]
    MissingQ(String),

    #[error(
        "truncation level for {family} exceeds the cap {cap}; use a larger C_target or step size"
    )]
    QExceedsCap { family: String, cap: usize },

    #[error(
        "operator chain {chain} needs derivatives of order {needed}, provider supplied {available}"
    )]
    MissingDerivative {
        chain: String,
        needed: usize,
        available: usize,
    },

    #[error("non-finite value in term {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
