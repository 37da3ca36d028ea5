use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: duplicate publication id `{id}`")]
    DuplicatePublication { line: usize, id: String },

    #[error("line {line}: publication `{id}` has year {year}, outside [{min}, {max}]")]
    YearOutOfRange {
        line: usize,
        id: String,
        year: i32,
        min: i32,
        max: i32,
    },

    #[error("line {line}: publication `{id}` references unknown publication `{reference}`")]
    DanglingReference { line: usize, id: String, reference: String },

    #[error("unknown researcher `{0}`")]
    UnknownResearcher(String),

    #[error("unknown publication `{0}`")]
    UnknownPublication(String),

    #[error("invalid timeline: {0}")]
    InvalidTimeline(String),

    #[error("invalid selection criteria: {0}")]
    InvalidCriteria(String),

    #[error("only {eligible} eligible researchers, but a sample of {requested} was requested")]
    SampleShortfall { eligible: usize, requested: usize },

    #[error("no researcher matches the selection criteria")]
    NoEligibleResearchers,

    #[error("researcher `{0}` has no publications in the restricted past")]
    NoPastPublications(String),

    #[error("vocabulary needs at least one document")]
    EmptyCollection,

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("evaluation tables have mismatched keys: {}", .0.join(", "))]
    KeyMismatch(Vec<String>),

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}
