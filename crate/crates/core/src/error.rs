use std::path::PathBuf;

/// Errors raised anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("line {line}: dimension mismatch: expected {expected} values, found {found}")]
    RaggedLine {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("zero-norm vector for token {0:?} cannot be normalized")]
    ZeroNorm(String),

    #[error("embedding file contains no vectors")]
    EmptyVocab,

    #[error("pad token {0:?} is not in the vocabulary")]
    PadTokenMissing(String),

    #[error("argument outside supported domain: {0}")]
    Domain(String),

    #[error("degenerate curvature: {param} has J = {value:e}")]
    DegenerateCurvature { param: String, value: f64 },

    #[error("Cholesky factorisation failed: {0}")]
    Cholesky(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{0}")]
    Empty(String),
}

pub type Result<T> = std::result::Result<T, Error>;
