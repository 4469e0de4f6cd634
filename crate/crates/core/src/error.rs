use std::path::PathBuf;

/// Errors produced while loading data or running the selection pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row} has {got} fields, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },

    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),

    #[error("schema references unknown column {0:?}")]
    UnknownSchemaColumn(String),

    #[error("malformed schema line {line}: {text:?}")]
    MalformedSchema { line: usize, text: String },

    #[error("column {0:?} is declared continuous but contains non-numeric values")]
    NonNumericContinuous(String),

    #[error("dataset needs at least 2 samples and 1 feature, got {rows} x {cols}")]
    TooSmall { rows: usize, cols: usize },

    #[error("labels are degenerate: need at least 2 distinct classes")]
    DegenerateLabels,

    #[error("all features are constant; nothing to select")]
    NoInformativeFeatures,

    #[error("column has fewer than 2 values")]
    ShortColumn,

    #[error("columns have mismatched lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("correlation is undefined for a constant column")]
    ConstantColumn,

    #[error("invalid feature subset: {0}")]
    InvalidSubset(String),

    #[error("need k >= 1 and k <= training samples, got k={k} with {train} training samples")]
    BadNeighborCount { k: usize, train: usize },

    #[error("need 2 <= folds <= samples, got folds={folds} with {samples} samples")]
    BadFoldCount { folds: usize, samples: usize },

    #[error("{0}")]
    InvalidOption(String),
}
