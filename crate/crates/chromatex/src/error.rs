//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid color space: expected {expected}, got {actual}")]
    InvalidColorSpace { expected: String, actual: String },

    #[error("invalid face box: {0}")]
    InvalidBox(String),

    #[error("sample point ({x}, {y}) is within {margin} pixels of the border of a {width}x{height} grid")]
    BorderViolation {
        x: usize,
        y: usize,
        margin: usize,
        width: usize,
        height: usize,
    },

    #[error("grid {width}x{height} too small for LBP radius {radius} (needs at least {min}x{min})")]
    ImageTooSmall {
        width: usize,
        height: usize,
        radius: f64,
        min: usize,
    },

    #[error("empty frame sequence")]
    EmptySequence,

    #[error("training set must contain both a genuine and an attack sample")]
    DegenerateTrainingSet,

    #[error("feature dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch { expected: usize, actual: usize },

    #[error("not enough subjects for {folds} folds: {subjects} distinct subjects")]
    NotEnoughSubjects { subjects: usize, folds: usize },

    #[error("empty score list: both genuine and attack scores are required")]
    EmptyScores,

    #[error("{path}:{line}: {msg}")]
    Manifest {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("malformed {what}: {msg}")]
    Format { what: String, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(what: &str, msg: impl Into<String>) -> Self {
        Error::Format {
            what: what.to_string(),
            msg: msg.into(),
        }
    }

    /// Stable process exit code for the CLI; each failure class has its own.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_) => 2,
            Error::Io { .. } => 3,
            Error::Manifest { .. } => 4,
            Error::Format { .. } => 5,
            Error::InvalidColorSpace { .. }
            | Error::InvalidBox(_)
            | Error::BorderViolation { .. }
            | Error::ImageTooSmall { .. } => 6,
            Error::DimMismatch { .. } => 7,
            Error::DegenerateTrainingSet | Error::NotEnoughSubjects { .. } => 8,
            Error::EmptySequence | Error::EmptyScores => 9,
        }
    }

    /// Short machine-readable tag used in single-line CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidColorSpace { .. } => "color-space",
            Error::InvalidBox(_) => "face-box",
            Error::BorderViolation { .. } => "border",
            Error::ImageTooSmall { .. } => "image-too-small",
            Error::EmptySequence => "empty-sequence",
            Error::DegenerateTrainingSet => "degenerate-training-set",
            Error::DimMismatch { .. } => "dim-mismatch",
            Error::NotEnoughSubjects { .. } => "not-enough-subjects",
            Error::EmptyScores => "empty-scores",
            Error::Manifest { .. } => "manifest",
            Error::InvalidParams(_) => "params",
            Error::Format { .. } => "format",
            Error::Io { .. } => "io",
        }
    }
}
