use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("invalid residue letter {letter:?}{}", position.map(|p| format!(" at position {p}")).unwrap_or_default())]
    InvalidLetter { letter: char, position: Option<usize> },

    #[error("unknown encoding scheme {0:?}")]
    UnknownScheme(String),

    #[error("substitution matrix: {0}")]
    MatrixFormat(String),

    #[error("angle is undefined and cannot be used as a target")]
    UndefinedAngle,

    #[error("ambiguous angle: sin/cos pair ({sin}, {cos}) is too close to the origin")]
    AmbiguousAngle { sin: f64, cos: f64 },

    #[error("window size {0} is not an odd value in 3..=23")]
    InvalidWindow(usize),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("duplicate protein id {0:?}")]
    DuplicateId(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("training diverged{}", epoch.map(|e| format!(" at epoch {e}")).unwrap_or_default())]
    Divergence { epoch: Option<usize> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attaches the offending file path.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}
