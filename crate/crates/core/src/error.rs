use std::path::PathBuf;

use crate::tfn::Tfn;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("negative component in {0}")]
    Negative(Tfn),

    #[error("negative value {0}")]
    NegativeValue(f64),

    #[error("component must be strictly positive in {0}")]
    NonPositive(Tfn),

    #[error("{tfn} violates l <= m <= u{}", at.as_ref().map(|a| format!(" at {a}")).unwrap_or_default())]
    NonMonotone { tfn: Tfn, at: Option<String> },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("scale `{scale}` has no entry for rating {rating}")]
    UnknownRating { scale: String, rating: i64 },

    #[error("unknown scale `{0}`")]
    UnknownScale(String),

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("duplicate cell ({0}, {1})")]
    DuplicateCell(String, String),

    #[error("unknown id `{0}`")]
    UnresolvedId(String),

    #[error("missing cell ({0}, {1})")]
    MissingCell(String, String),

    #[error("invalid matrix cell ({row}, {col}): {reason}")]
    InvalidCell { row: String, col: String, reason: String },

    #[error("sum of {0} is zero")]
    ZeroTotal(&'static str),

    #[error("renumbering map does not match the selected barriers: {0}")]
    Coverage(String),

    #[error("{source_name}:{line}: {message}")]
    Parse { source_name: String, line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("embedded resource `{0}` failed checksum verification")]
    Corrupted(&'static str),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{stage} stage: {source}")]
    Stage { stage: &'static str, source: Box<Error> },
}

impl Error {
    pub(crate) fn parse(source_name: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse { source_name: source_name.into(), line, message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// True when the root cause is a filesystem failure rather than bad content.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Stage { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
