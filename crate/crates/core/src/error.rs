use thiserror::Error;

/// Errors shared across the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("domain violation at row {row}, column {col}: {detail}")]
    DomainViolation {
        row: usize,
        col: usize,
        detail: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse weight function spec `{0}`")]
    ParseHSpec(String),

    #[error("zero quadratic diagonal for coordinate {index} in block {block}; data column may be degenerate")]
    ZeroDiagonal { block: usize, index: usize },

    #[error("block {block} is singular or not positive definite; consider amplifying the loss")]
    SingularBlock { block: usize },

    #[error("amplifier scope incompatible with loss layout: {0}")]
    ScopeMismatch(String),

    #[error("eta second-moment block is zero for column {block}; cannot profile out eta")]
    ZeroEtaBlock { block: usize },

    #[error("zero denominator in {0}")]
    ZeroDenominator(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("conditional density underflow for coordinate {coord}")]
    ConditionalUnderflow { coord: usize },

    #[error("model is not normalizable: condition {0} violated")]
    NotNormalizable(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("solver did not converge within {max_iter} sweeps")]
    NoConvergence { max_iter: usize },

    #[error("true support is empty; true positive rate undefined")]
    EmptyTrueSupport,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
