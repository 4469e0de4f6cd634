//! Supervised feature selection for mixed continuous/discrete tabular data.
//!
//! The pipeline separates features by kind, builds a per-kind dissimilarity
//! matrix (correlation-based for continuous features, symmetric-uncertainty
//! based for discrete ones), groups redundant features with a density-based
//! clustering pass, and keeps only the most useful representatives of each
//! group: the cluster center plus, when it beats the center, the member with
//! the highest mutual information with the class labels. The selected subset
//! can then be scored with a cross-validated k-nearest-neighbor classifier
//! that handles mixed feature types natively.
//!
//! Everything is deterministic: all randomness flows from explicit seeds, all
//! ties break toward lower indices, and parallel code paths are restricted to
//! computations whose results cannot depend on scheduling order.

pub mod dataset;
pub mod eval;
pub mod fclust;
pub mod measures;
pub mod select;
pub mod synth;

mod error;

pub use dataset::{
    impute_missing, load_csv, parse_schema, ContinuousView, Dataset, DiscreteView, FeatureColumn,
    FeatureKind, ImputePolicy,
};
pub use error::Error;
pub use eval::{cross_validate, mean_ranks, EvalOptions, EvalReport, RankTable};
pub use fclust::{Clustering, DensityParams, FeatureCluster};
pub use measures::DissimilarityMatrix;
pub use select::{
    feature_relevances, run_pipeline, PipelineOptions, PipelineOutput, SelectedFeature,
    SelectionReason, SelectionResult,
};

/// Shorthand for results carrying this crate's error type.
pub type Result<T> = std::result::Result<T, Error>;
