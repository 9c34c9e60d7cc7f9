use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure classes, mapped one-to-one onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Endpoint,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Data => 3,
            ErrorCategory::Endpoint => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Config => "config",
            ErrorCategory::Data => "data",
            ErrorCategory::Endpoint => "endpoint",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("document `{0}` is empty")]
    EmptyDocument(String),

    #[error("document `{doc_id}` has {words} words, segmentation needs at least {required}")]
    IneligibleDocument {
        doc_id: String,
        words: usize,
        required: usize,
    },

    #[error("insufficient corpus: {0}")]
    InsufficientCorpus(String),

    #[error("cannot fit a vocabulary on an empty corpus")]
    EmptyCorpus,

    #[error("malformed record at {location}: {reason}")]
    MalformedRecord { location: String, reason: String },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("zero-norm vector has no cosine distance")]
    ZeroVector,

    #[error("missing embedding for `{0}`")]
    MissingEmbedding(String),

    #[error("no {0} pairs to build a distribution from")]
    MissingLabelClass(&'static str),

    #[error("store version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },

    #[error("corrupt store: {0}")]
    CorruptStore(String),

    #[error("empty input")]
    EmptyInput,

    #[error("no {0} scores")]
    EmptyClass(&'static str),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("empty log-probability sequence for `{0}`")]
    EmptySequence(String),

    #[error("positive log-probability {value} for `{id}`")]
    PositiveLogprob { id: String, value: f64 },

    #[error("log base mismatch: header declares `{header}`, record `{id}` declares `{record}`")]
    MixedLogBase {
        header: String,
        record: String,
        id: String,
    },

    #[error("group `{0}` is empty")]
    EmptyGroup(String),

    #[error("document `{doc_id}` has {found} paragraphs, {strategy} needs {needed}")]
    InsufficientParagraphs {
        doc_id: String,
        strategy: &'static str,
        needed: usize,
        found: usize,
    },

    #[error("document `{doc_id}` has {words} words, completion needs at least {required}")]
    TooShortForCompletion {
        doc_id: String,
        words: usize,
        required: usize,
    },

    #[error("no offline completion for ({doc_id}, {strategy})")]
    MissingOfflineRecord { doc_id: String, strategy: String },

    #[error("endpoint failure: {0}")]
    EndpointFailure(String),

    #[error("output `{0}` already exists with different content")]
    OutputExists(PathBuf),

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

    pub(crate) fn malformed(location: impl Into<String>, reason: impl ToString) -> Self {
        Error::MalformedRecord {
            location: location.into(),
            reason: reason.to_string(),
        }
    }

    /// Stable snake_case identifier used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::EmptyDocument(_) => "empty_document",
            Error::IneligibleDocument { .. } => "ineligible_document",
            Error::InsufficientCorpus(_) => "insufficient_corpus",
            Error::EmptyCorpus => "empty_corpus",
            Error::MalformedRecord { .. } => "malformed_record",
            Error::DuplicateId(_) => "duplicate_id",
            Error::NonFinite(_) => "non_finite",
            Error::ZeroVector => "zero_vector",
            Error::MissingEmbedding(_) => "missing_embedding",
            Error::MissingLabelClass(_) => "missing_label_class",
            Error::VersionMismatch { .. } => "version_mismatch",
            Error::CorruptStore(_) => "corrupt_store",
            Error::EmptyInput => "empty_input",
            Error::EmptyClass(_) => "empty_class",
            Error::LengthMismatch(_) => "length_mismatch",
            Error::EmptySequence(_) => "empty_sequence",
            Error::PositiveLogprob { .. } => "positive_logprob",
            Error::MixedLogBase { .. } => "mixed_log_base",
            Error::EmptyGroup(_) => "empty_group",
            Error::InsufficientParagraphs { .. } => "insufficient_paragraphs",
            Error::TooShortForCompletion { .. } => "too_short_for_completion",
            Error::MissingOfflineRecord { .. } => "missing_offline_record",
            Error::EndpointFailure(_) => "endpoint_failure",
            Error::OutputExists(_) => "output_exists",
            Error::Io { .. } => "io",
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidConfig(_) => ErrorCategory::Config,
            Error::EndpointFailure(_) => ErrorCategory::Endpoint,
            _ => ErrorCategory::Data,
        }
    }
}
