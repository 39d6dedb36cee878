use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SvqError>;

#[derive(Debug, Error)]
pub enum SvqError {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("batch is empty")]
    EmptyBatch,

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        actual: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("training diverged at epoch {epoch} (stage {stage}): {detail}")]
    Divergence {
        epoch: usize,
        stage: usize,
        detail: String,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("{path}: line {line}, field `{field}`: {reason}")]
    Parse {
        path: String,
        line: usize,
        field: String,
        reason: String,
    },

    #[error("{path}: unexpected end of file at byte offset {offset} (expected {expected})")]
    Truncated {
        path: String,
        offset: usize,
        expected: String,
    },

    #[error("{path}: unsupported {kind} format version {found} (this build reads version {supported})")]
    UnsupportedVersion {
        path: String,
        kind: String,
        found: u32,
        supported: u32,
    },

    #[error("{path}: unknown artifact kind `{found}`")]
    UnknownKind { path: String, found: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("missing input files: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    MissingInputs(Vec<PathBuf>),

    #[error("structure check failed: {0}")]
    StructureCheck(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SvqError {
    pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Self {
        SvqError::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn dims(context: impl Into<String>, expected: usize, actual: usize) -> Self {
        SvqError::DimensionMismatch {
            context: context.into(),
            expected,
            actual,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        SvqError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
