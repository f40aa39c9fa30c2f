use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The data admit no usable fit (e.g. no penalty in the grid yields a
    /// solvable Gram system).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// A dataset is missing a (time step, treatment) cell an estimator needs.
    #[error("missing cell: {0}")]
    MissingCell(String),

    #[error("csv schema error at row {row}, column {column}: {message}")]
    CsvSchema {
        row: usize,
        column: String,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
