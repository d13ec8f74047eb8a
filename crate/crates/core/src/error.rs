use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("empty table")]
    EmptyTable,
    #[error("ragged row at line {line}: expected {expected} cells, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("target column `{0}` not found")]
    MissingTarget(String),
    #[error("missing value in column `{column}` at row {row}")]
    MissingValue { row: usize, column: String },
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("column mismatch: {0}")]
    ColumnMismatch(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("empty column list")]
    EmptyColumnList,
    #[error("feature index {0} out of range")]
    FeatureOutOfRange(usize),
    #[error("candidate feature {0} is already selected")]
    CandidateSelected(usize),
    #[error("selected set is empty")]
    EmptySelected,
    #[error("K={k} out of range for {d} features")]
    KOutOfRange { k: usize, d: usize },
    #[error("exhaustive search over C({pool}, {order}) subsets exceeds the guard of {limit}")]
    CombinatorialGuard { pool: usize, order: usize, limit: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("zero total count")]
    ZeroCount,
    #[error("empty training set")]
    EmptyTraining,
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}
