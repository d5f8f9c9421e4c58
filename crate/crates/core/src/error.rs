use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("alphabet mismatch")]
    AlphabetMismatch,

    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),

    #[error("symbol index {0} is outside the alphabet")]
    SymbolOutOfRange(usize),

    #[error("invalid relation spec `{spec}`: {reason}")]
    InvalidSpec { spec: String, reason: String },

    #[error("equivalence mismatch: `{0}` vs `{1}`")]
    EquivalenceMismatch(String, String),

    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("observation table is {0}")]
    TableNotReady(&'static str),

    #[error("distribution is not covered by the clique partition")]
    NotCovered,

    #[error("clique partition is not stable: states reached by {u:?} and {v:?} split on symbol {symbol:?}")]
    Unstable { u: String, v: String, symbol: String },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("query of length {len} exceeds the maximum query length {max}")]
    QueryTooLong { len: usize, max: usize },

    #[error("remote model: {0}")]
    Remote(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn spec(spec: &str, reason: impl Into<String>) -> Self {
        Error::InvalidSpec {
            spec: spec.to_string(),
            reason: reason.into(),
        }
    }
}
