use thiserror::Error;

/// Errors raised while loading data, learning models or imputing values.
#[derive(Debug, Error)]
pub enum Error {
    /// A field could not be parsed as a number or missing marker.
    /// Row and column are 1-based; row 1 is the header.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    /// A row does not match the header shape, or the stream has no data rows.
    #[error("structure error at row {row}: {message}")]
    Structure { row: usize, message: String },

    /// Header-level problems: duplicate or empty names, too few columns.
    #[error("schema error: {0}")]
    Schema(String),

    /// Learning is impossible: every row has at least one missing value.
    #[error("no complete tuples: every row has at least one missing value")]
    NoCompleteTuples,

    /// A tuple is missing every attribute, so no features remain to impute from.
    #[error("row {row} has no complete attributes to impute from")]
    NoCompleteAttributes { row: usize },

    /// An argument is out of range for the data it is applied to.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A linear system stayed singular even after the ridge fallback.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A masking plan cannot be applied to the given relation.
    #[error("mask plan error: {0}")]
    Plan(String),

    /// A serialized model file could not be interpreted.
    #[error("model file error: {0}")]
    ModelFormat(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
