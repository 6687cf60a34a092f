use thiserror::Error;

/// Everything that can go wrong inside the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid priority vector: {0}")]
    InvalidVector(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("matrix is not reciprocal at ({row}, {col}): a_ij * a_ji = {product}")]
    NotReciprocal { row: usize, col: usize, product: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64, last_iterate: Vec<f64> },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("degenerate class partition: lower quantile {lower} is not below upper quantile {upper}")]
    DegeneratePartition { lower: f64, upper: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(
        "no built-in quantile table for n = {n}; generate one with \
         `pcmkit simulate msobe --n {n} --out db.csv` followed by \
         `pcmkit report db.csv --index ati --error re_rev --format csv --out table.csv`, \
         then pass it via --table"
    )]
    UnsupportedOrder { n: usize },

    #[error("embedded table data failed its checksum (expected {expected}, got {actual})")]
    ChecksumMismatch { expected: String, actual: String },

    #[error("error model check failed: {0}")]
    ErrorModel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
