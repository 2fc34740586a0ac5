use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{what}, line {line}: {message}")]
    Parse { what: String, line: usize, message: String },

    #[error("line {line}: unknown speaker role {role:?}")]
    UnknownRole { line: usize, role: String },

    #[error("line {line}: unknown uptake level {level:?}")]
    UnknownLevel { line: usize, level: String },

    #[error("duplicate judgment for rater {rater:?} on pair {pair:?}")]
    DuplicateJudgment { rater: String, pair: String },

    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },

    #[error("line {line}: vector has {found} components, expected {expected}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },

    #[error("no vectors")]
    NoVectors,

    #[error("undefined cosine: zero vector")]
    UndefinedCosine,

    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("source sequence is empty")]
    EmptySource,

    #[error("n-gram order must be at least 1, got {0}")]
    InvalidNgramOrder(usize),

    #[error("source group {group:?} has {size} usable pairs; need more than {k} to sample {k} negatives")]
    SourceTooSmall { group: String, size: usize, k: usize },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("training diverged at epoch {epoch} (loss is not finite); try a smaller learning_rate")]
    Diverged { epoch: usize },

    #[error("feature schema mismatch: expected {expected}, got {found}")]
    SchemaMismatch { expected: String, found: String },

    #[error("probability {0} outside (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("zero rank variance")]
    ZeroRankVariance,

    #[error("need at least {needed} observations, got {found}")]
    TooFewObservations { needed: usize, found: usize },

    #[error("{degenerate} of {total} bootstrap resamples were degenerate")]
    DegenerateBootstrap { degenerate: usize, total: usize },

    #[error("item {item} has {found} ratings, expected {expected}")]
    VaryingRaterCounts { item: usize, expected: usize, found: usize },

    #[error("agreement undefined: every rating falls in a single category")]
    DegenerateAgreement,

    #[error("design matrix is rank deficient: column {0:?} is collinear with earlier columns")]
    Collinear(String),

    #[error("zero variance in both samples")]
    ZeroVariance,

    #[error("metric {metric} requires {requirement}")]
    MissingStore { metric: String, requirement: &'static str },

    #[error("unknown metric {0:?}")]
    UnknownMetric(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: impl Into<String>, line: usize, message: impl ToString) -> Self {
        Error::Parse {
            what: what.into(),
            line,
            message: message.to_string(),
        }
    }
}
