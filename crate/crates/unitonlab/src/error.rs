use thiserror::Error;

/// Errors produced across the pipeline.
#[derive(Debug, Error)]
pub enum UnitonError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular matrix in {0}")]
    SingularMatrix(String),

    #[error("element is not in the expected (sub)algebra: {0}")]
    NotInAlgebra(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("loop lies outside the Iwasawa cell: {0}")]
    CellViolation(String),

    #[error("Picard iteration did not terminate within {max_steps} steps")]
    PicardNoTermination { max_steps: usize },

    #[error("potential has poles; integration path not pole-free: {0}")]
    PoleOnDomain(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
