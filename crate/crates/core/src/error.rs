use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("non-numeric price {value:?} at row {row}, column {column}")]
    NonNumericPrice {
        row: usize,
        column: String,
        value: String,
    },

    #[error("non-positive price {value} at row {row}, column {column}")]
    NonPositivePrice { row: usize, column: String, value: f64 },

    #[error("need at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("subset size {k} exceeds universe of {available} tickers")]
    SubsetTooLarge { k: usize, available: usize },

    #[error("exhaustive enumeration refused for n = {n} (limit {limit})")]
    EnumerationTooLarge { n: usize, limit: usize },

    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("control and target are the same qubit ({0})")]
    SameQubit(usize),

    #[error("register must hold at least one qubit")]
    EmptyRegister,

    #[error("non-finite rotation angle {0}")]
    NonFiniteAngle(f64),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("empty generation")]
    EmptyGeneration,

    #[error("evaluation grids differ between runs")]
    GridMismatch,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the CLI: 1 for usage/config problems, 2 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) => 1,
            _ => 2,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Schema(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema(e.to_string())
    }
}
