use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("decoder `{decoder}` rejected instance: {reason}")]
    Malformed {
        decoder: &'static str,
        reason: String,
    },

    #[error("resource guard: {what} = {requested} exceeds bound {bound}")]
    ResourceGuard {
        what: String,
        requested: u64,
        bound: u64,
    },

    #[error("need n^2 = {needed} digits of pi for n = {n}, store holds {available}")]
    InsufficientDigits { n: u64, needed: u64, available: u64 },

    #[error("budget exceeded: {resource} cap {cap}")]
    BudgetExceeded { resource: &'static str, cap: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported length {n} for ensemble `{ensemble}`: {reason}")]
    UnsupportedLength {
        ensemble: String,
        n: usize,
        reason: String,
    },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infinite score: forecast {forecast} on outcome {outcome}")]
    InfiniteScore { outcome: u8, forecast: f64 },

    #[error("buyer constraint `{cap}` violated: {detail}")]
    ConstraintViolated { cap: &'static str, detail: String },

    #[error("series too short: {have} lengths beyond burn-in, need at least {need}")]
    SeriesTooShort { have: usize, need: usize },

    #[error("mismatched modes: {0}")]
    ModeMismatch(String),

    #[error("empty world set")]
    EmptyWorldSet,

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors raised by a desk-scale guard (lengths, digit counts,
    /// enumeration sizes, budget caps).
    pub fn is_resource_guard(&self) -> bool {
        matches!(
            self,
            Error::ResourceGuard { .. }
                | Error::InsufficientDigits { .. }
                | Error::BudgetExceeded { .. }
        )
    }

    /// True for errors naming an identifier nobody registered.
    pub fn is_unknown_identifier(&self) -> bool {
        matches!(self, Error::Unknown { .. })
    }

    /// Short stable tag used in machine-parsable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Malformed { .. } => "malformed-instance",
            Error::ResourceGuard { .. } => "resource-guard",
            Error::InsufficientDigits { .. } => "insufficient-digits",
            Error::BudgetExceeded { .. } => "budget-exceeded",
            Error::Domain(_) => "domain",
            Error::UnsupportedLength { .. } => "unsupported-length",
            Error::Unknown { .. } => "unknown-identifier",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::InfiniteScore { .. } => "infinite-score",
            Error::ConstraintViolated { .. } => "constraint-violated",
            Error::SeriesTooShort { .. } => "series-too-short",
            Error::ModeMismatch(_) => "mode-mismatch",
            Error::EmptyWorldSet => "empty-world-set",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn guard(what: impl Into<String>, requested: u64, bound: u64) -> Self {
        Error::ResourceGuard {
            what: what.into(),
            requested,
            bound,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
