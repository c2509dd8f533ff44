//! Crate-wide error type.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the pipeline.
///
/// Variants are grouped by how the CLI maps them to exit codes:
/// configuration/usage problems, container I/O problems, degenerate-data
/// problems, and numerical divergence.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A config invariant is violated; the message names the constraint.
    #[error("configuration error: {0}")]
    Config(String),

    /// Invalid input data (non-finite sample, unknown label value, ...).
    #[error("input error: {0}")]
    Input(String),

    /// Mismatched tensor/layout dimensions between two arguments.
    #[error("shape error: {0}")]
    Shape(String),

    /// An operation was applied in the wrong object state
    /// (e.g. normalizing already-normalized features).
    #[error("state error: {0}")]
    State(String),

    /// Normalizer fitting failed (empty training set).
    #[error("fit error: {0}")]
    Fit(String),

    /// A sequence exceeds the configured maximum length.
    #[error("length error: {0}")]
    Length(String),

    /// Unknown channel or channel-group name.
    #[error("unknown channel or group: {0}")]
    Lookup(String),

    /// Dataset partitioning failed (too few records).
    #[error("partition error: {0}")]
    Partition(String),

    /// Synthetic generation could not satisfy its contract.
    #[error("generation error: {0}")]
    Generation(String),

    /// Metric undefined for the given label distribution.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// A loss/gradient batch carries zero total weight.
    #[error("degenerate batch: {0}")]
    DegenerateBatch(String),

    /// Training cannot proceed on the given data.
    #[error("training error: {0}")]
    Training(String),

    /// A non-finite gradient reached the optimizer.
    #[error("numerical divergence in parameter {param}")]
    Divergence { param: String },

    /// Malformed container header or metadata.
    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    /// A data file is shorter than its header promises.
    #[error("truncated file {path}: expected {expected} bytes, found {actual}")]
    Truncated {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    /// Header and data dimensions disagree.
    #[error("dimension error in {path}: {message}")]
    Dimension { path: PathBuf, message: String },

    /// Underlying filesystem failure.
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// JSON (de)serialization failure.
    #[error("JSON error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
