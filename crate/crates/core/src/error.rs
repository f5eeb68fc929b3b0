//! Crate-wide error type.
//!
//! Domain violations (a malformed dialogue, an undefined metric) are errors,
//! not panics; callers map them onto exit codes or recovery paths.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dialogue has no utterances")]
    EmptyDialogue,

    #[error("utterance {index} is empty after trimming")]
    EmptyUtterance { index: usize },

    #[error("dialogue `{dialogue_id}` violates invariants: {first}")]
    InvariantViolation { dialogue_id: String, first: String },

    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("schema version mismatch at line {line}: found `{found}`, expected `{expected}`")]
    VersionError {
        line: usize,
        found: String,
        expected: String,
    },

    #[error("split is degenerate: {0}")]
    DegenerateSplit(String),

    #[error("question text is empty")]
    MissingQuestion,

    #[error("expected a {expected} turn, got {got}")]
    SpeakerMismatch { expected: String, got: String },

    #[error("difficulty prompt requires at least one knowledge component name")]
    MissingKC,

    #[error("input text contains the reserved marker `{marker}`")]
    MarkerCollision { marker: String },

    #[error("token `{token}` does not resolve to a single vocabulary id")]
    TokenResolution { token: String },

    #[error("provider failure: {0}")]
    Provider(String),

    #[error("non-finite input: {0}")]
    NumericDomain(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("training diverged (non-finite loss) on batch [{examples}]")]
    Divergence { examples: String },

    #[error("training history is empty")]
    EmptyHistory,

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("all values are equal; min-max normalization undefined")]
    DegenerateRange,

    #[error("knowledge component `{0}` not found")]
    UnknownKC(String),

    #[error("alignment mismatch: {0}")]
    AlignmentError(String),

    #[error("report has no `{0}` section")]
    MissingSection(String),
}

impl Error {
    /// Stable machine-readable name, used by the CLI when reporting failures.
    pub fn name(&self) -> &'static str {
        match self {
            Error::EmptyDialogue => "EmptyDialogue",
            Error::EmptyUtterance { .. } => "EmptyUtterance",
            Error::InvariantViolation { .. } => "InvariantViolation",
            Error::ParseError { .. } => "ParseError",
            Error::VersionError { .. } => "VersionError",
            Error::DegenerateSplit(_) => "DegenerateSplit",
            Error::MissingQuestion => "MissingQuestion",
            Error::SpeakerMismatch { .. } => "SpeakerMismatch",
            Error::MissingKC => "MissingKC",
            Error::MarkerCollision { .. } => "MarkerCollision",
            Error::TokenResolution { .. } => "TokenResolution",
            Error::Provider(_) => "ProviderError",
            Error::NumericDomain(_) => "NumericDomain",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::Divergence { .. } => "DivergenceError",
            Error::EmptyHistory => "EmptyHistory",
            Error::UndefinedMetric(_) => "UndefinedMetric",
            Error::DegenerateRange => "DegenerateRange",
            Error::UnknownKC(_) => "UnknownKC",
            Error::AlignmentError(_) => "AlignmentError",
            Error::MissingSection(_) => "MissingSection",
        }
    }
}
