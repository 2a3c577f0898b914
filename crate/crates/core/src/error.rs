use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed container header: {0}")]
    MalformedHeader(String),

    #[error("truncated payload: expected {expected} values, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("payload has {0} trailing bytes after the declared values")]
    TrailingBytes(usize),

    #[error("non-finite value at flat index {index}")]
    NonFiniteValue { index: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("class ids are not contiguous: class {missing} has no labeled pixel (max id {max})")]
    NonContiguousClasses { missing: usize, max: usize },

    #[error("class {class} has {available} samples, {requested} requested")]
    InsufficientSamples {
        class: usize,
        available: usize,
        requested: usize,
    },

    #[error("split leaves the test set empty")]
    EmptyTestSet,

    #[error("at least two nonempty classes are required, found {0}")]
    TooFewClasses(usize),

    #[error("vector is not unit norm (norm = {0})")]
    NotUnitNorm(f64),

    #[error("degenerate direction: between-class sign sum N(t) vanished")]
    DegenerateDirection,

    #[error("zero denominator in trace ratio")]
    ZeroDenominator,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Name of the pipeline stage an error was raised in, if it was tagged.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

/// Tags an untagged error with the pipeline stage it occurred in.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| match e {
            tagged @ Error::Stage { .. } => tagged,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        })
    }
}
