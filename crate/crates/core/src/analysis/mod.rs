//! Aggregation of transcripts into cooperative profiles plus the statistics
//! used to judge them: standard errors, bootstrap convergence, z-scores and
//! a least-squares approximation of the proximity regression.
//!
//! The regression is ordinary least squares with fixed-effect dummies, not a
//! Bayesian hierarchical fit; every output that carries it says so.

mod bootstrap;
mod profile;
mod regression;
mod stats;

pub use bootstrap::{bootstrap_convergence, ConvergencePoint, DEFAULT_RESAMPLES, DEFAULT_SUBSET_SIZES};
pub use profile::{aggregate_profile, ProfileRow};
pub use regression::{
    build_design_matrix, ols_fit, DesignMatrix, DesignOptions, ObservationRow, RegressionResult, OLS_METHOD_LABEL,
};
pub use stats::{mean, mean_sd, zscore};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("no completed transcripts to aggregate")]
    NoCompletedTranscripts,
    #[error("transcripts mix conditions: {0}")]
    MixedTranscripts(String),
    #[error("metric list is empty")]
    EmptyMetrics,
    #[error("subset size {k} is not in 1..={available}")]
    InvalidSubsetSize { k: usize, available: usize },
    #[error("resamples must be at least 1")]
    ZeroResamples,
    #[error("need at least 2 values, got {0}")]
    TooFewValues(usize),
    #[error("values have zero variance")]
    ZeroVariance,
    #[error("design has {rows} rows but {cols} columns")]
    UnderDetermined { rows: usize, cols: usize },
    #[error("{x_rows} design rows but {y_len} responses")]
    LengthMismatch { x_rows: usize, y_len: usize },
    #[error("row {row} has {got} columns, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("non-finite value in regression input")]
    NonFinite,
    #[error("design is rank deficient beyond regularization; dependent columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),
    #[error("unknown game \"{0}\"")]
    UnknownGame(String),
    #[error("row {0} has no family but family dummies were requested")]
    MissingFamily(usize),
}
