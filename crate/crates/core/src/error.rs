//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by dataset handling, training, imputation, clustering,
/// and the evaluation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    BadNumericCell {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("no data rows")]
    EmptyDataset,

    #[error("row {row}: expected {expected} components, found {found}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("column {column}: only {present} present values, need at least 2")]
    ColumnTooSparse { column: usize, present: usize },

    #[error("column {column}: zero standard deviation over present values")]
    ZeroStd { column: usize },

    #[error("column {column}: no present values")]
    EmptyColumn { column: usize },

    #[error("all components missing")]
    AllMissing,

    #[error("rows with every component missing: {rows:?}")]
    AllMissingRows { rows: Vec<usize> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need {needed} complete rows to sample code-vectors, found {found}")]
    NotEnoughCompleteRows { needed: usize, found: usize },

    #[error("codebook needs at least 2 units, found {0}")]
    TooFewUnits(usize),

    #[error("cut level {k} out of range 1..={n}")]
    CutOutOfRange { k: usize, n: usize },

    #[error("interval level must lie strictly between 0 and 1, got {0}")]
    BadLevel(f64),

    #[error("row {row}: cannot suppress {requested} of {present} present values")]
    SuppressTooMany {
        row: usize,
        requested: usize,
        present: usize,
    },

    #[error("partitions cover {left} and {right} leaves")]
    LeafCountMismatch { left: usize, right: usize },

    #[error("model/data mismatch: {0}")]
    ModelMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
