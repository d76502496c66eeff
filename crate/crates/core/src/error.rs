use std::path::PathBuf;

/// Broad error categories, used by the command line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("duplicate document id `{0}`")]
    DuplicateId(String),

    #[error("unparseable date `{value}` (expected YYYY-MM-DD)")]
    InvalidDate { value: String },

    #[error("feature weight out of range: `{feature}` = {value} for document `{id}`")]
    FeatureOutOfRange { id: String, feature: String, value: f64 },

    #[error("non-numeric value `{value}` in column `{column}`")]
    NonNumeric { column: String, value: String },

    #[error("invalid name `{name}`: {reason}")]
    InvalidName { name: String, reason: String },

    #[error("name `{0}` already exists")]
    NameCollision(String),

    #[error("invalid regular expression for `{name}`: {source}")]
    Regex {
        name: String,
        #[source]
        source: regex::Error,
    },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty lexicon `{0}`")]
    EmptyLexicon(String),

    #[error("malformed input at line {line}: {message}")]
    Malformed { line: u64, message: String },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("TFIDF weighting requires document frequency statistics")]
    MissingIdf,

    #[error("aggregation window has no tokens")]
    ZeroTokens,

    #[error("unknown language `{0}`")]
    UnknownLanguage(String),

    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),

    #[error("row keys do not match: {0}")]
    KeyMismatch(String),

    #[error("not enough observations: need {needed}, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("selection leaves nothing")]
    EmptyResult,

    #[error("solver did not converge after {sweeps} sweeps")]
    NonConvergence { sweeps: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => ErrorClass::Config,
            Error::NonConvergence { .. } | Error::Numerical(_) => ErrorClass::Numerical,
            Error::Context { source, .. } => source.class(),
            _ => ErrorClass::Data,
        }
    }

    /// Wraps the error with a location, typically a file path.
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
