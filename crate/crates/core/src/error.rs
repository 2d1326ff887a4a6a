use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Latent component a composition error came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Semantic,
    Stochastic,
}

impl std::fmt::Display for Component {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Component::Semantic => "semantic",
            Component::Stochastic => "stochastic",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("embedding dimension mismatch: expected {expected}, offending ids: {}", offending.join(", "))]
    EmbeddingDimensionMismatch {
        expected: usize,
        offending: Vec<String>,
    },

    #[error("non-finite value in {context}")]
    NonFiniteValue { context: String },

    #[error("lambda {0} outside [0, 1]")]
    LambdaOutOfRange(f64),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("zero vector in {context}")]
    ZeroVector { context: String },

    #[error("antipodal inputs (angle {angle} rad): interpolation direction undefined")]
    AntipodalInputs { angle: f64 },

    #[error("{component} component: {source}")]
    Component {
        component: Component,
        #[source]
        source: Box<Error>,
    },

    #[error("missing metadata for subjects: {}", subjects.join(", "))]
    MissingMetadata { subjects: Vec<String> },

    #[error("duplicate metadata entry for {key}")]
    DuplicateMetadata { key: String },

    #[error("need at least 2 distinct subjects, found {found}")]
    InsufficientSubjects { found: usize },

    #[error("empty score set: {what}")]
    EmptyScoreSet { what: String },

    #[error("uneven probe counts in morph {morph}")]
    UnevenProbeCounts { morph: String },

    #[error("key mismatch: missing {missing}")]
    KeyMismatch { missing: String },

    #[error("duplicate key {key}")]
    DuplicateKey { key: String },

    #[error("subject vector is not unit norm (norm = {norm})")]
    NonUnitSubject { norm: f64 },

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("{}parse error at line {line}, column {column}: {message}", display_path(path))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{}schema error: {message}", display_path(path))]
    Schema {
        path: Option<PathBuf>,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("backend failure{}: {message}", request.as_ref().map(|r| format!(" (request {r})")).unwrap_or_default())]
    Backend {
        request: Option<String>,
        message: String,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn display_path(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => format!("{}: ", p.display()),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(message: impl Into<String>) -> Self {
        Error::Schema {
            path: None,
            message: message.into(),
        }
    }

    pub(crate) fn backend(request: Option<&str>, message: impl Into<String>) -> Self {
        Error::Backend {
            request: request.map(str::to_owned),
            message: message.into(),
        }
    }

    /// Attach a file path to parse/schema errors.
    pub fn with_path(self, p: impl Into<PathBuf>) -> Self {
        match self {
            Error::Parse {
                line,
                column,
                message,
                ..
            } => Error::Parse {
                path: Some(p.into()),
                line,
                column,
                message,
            },
            Error::Schema { message, .. } => Error::Schema {
                path: Some(p.into()),
                message,
            },
            other => other,
        }
    }

    pub fn is_backend(&self) -> bool {
        matches!(self, Error::Backend { .. })
    }

    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Json(_))
    }
}
