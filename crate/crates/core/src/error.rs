use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid UTF-8 at byte offset {offset}")]
    Decode { offset: u64 },

    #[error("corpus contains no tokens")]
    EmptyCorpus,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("corpus is not lemmatized; this computation needs lemma annotations")]
    NotLemmatized,

    #[error("reference frequency table is empty")]
    EmptyReference,

    #[error("no translation distribution with a positive total")]
    NoUsableDistribution,

    #[error("paradigm has no positive wordform counts")]
    EmptyParadigm,

    #[error("corpus has no lemma-bearing tokens")]
    NoLemmaTokens,

    #[error("no lemma has at least {min_wordforms} distinct wordforms")]
    BelowWordformThreshold { min_wordforms: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("language mismatch: expected {expected}, found {found}")]
    LanguageMismatch { expected: String, found: String },

    #[error("report has no metric results")]
    NoMetrics,

    #[error("baseline label {0:?} not found among reports")]
    MissingBaseline(String),

    #[error("duplicate report label {0:?}")]
    DuplicateLabel(String),

    #[error("unsupported report schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("malformed report: {0}")]
    Report(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),
}
