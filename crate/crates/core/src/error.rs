use thiserror::Error;

/// Errors raised anywhere in the crate. Round and option indices in
/// messages are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("round {round}: probabilities sum to {mass}, not 1")]
    NonUnitMass { round: usize, mass: String },
    #[error("round {round}, option {option}: negative {field}")]
    NegativeUtility {
        round: usize,
        option: usize,
        field: &'static str,
    },
    #[error("round {round}: probability of option {option} is outside [0, 1]")]
    BadProbability { round: usize, option: usize },
    #[error("round {0} has no options")]
    EmptyRound(usize),
    #[error("instance has no rounds")]
    NoRounds,
    #[error("some agent utility is zero")]
    ZeroAgentUtility,
    #[error("no option has positive agent utility")]
    NoPositiveUtility,
    #[error("some agent or principal utility is zero")]
    ZeroUtility,
    #[error("bad parameter {name}: {reason}")]
    BadParam { name: String, reason: String },
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("invalid instance: {0}")]
    Validation(Box<Error>),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("search space too large: {count} candidates (cap {cap})")]
    TooLarge { count: String, cap: String },
    #[error("round {round}: options {first} and {second} share b but have different acceptance")]
    IndistinguishableMismatch { round: usize, first: usize, second: usize },
    #[error("scheme was not built from a redacted instance")]
    ProvenanceViolation,
    #[error("round {round}: group with b = {b} has agent expectation at least sqrt(alpha)")]
    HighExpectationGroup { round: usize, b: String },
    #[error("round {round}: group with b = {b} has agent expectation below sqrt(alpha)")]
    LowExpectationGroup { round: usize, b: String },
    #[error("internal consistency violation: {0}")]
    ConsistencyViolation(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn bad_param(name: &str, reason: impl Into<String>) -> Self {
        Error::BadParam {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    /// Stable variant name used in CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonUnitMass { .. } => "NonUnitMass",
            Error::NegativeUtility { .. } => "NegativeUtility",
            Error::BadProbability { .. } => "BadProbability",
            Error::EmptyRound(_) => "EmptyRound",
            Error::NoRounds => "NoRounds",
            Error::ZeroAgentUtility => "ZeroAgentUtility",
            Error::NoPositiveUtility => "NoPositiveUtility",
            Error::ZeroUtility => "ZeroUtility",
            Error::BadParam { .. } => "BadParam",
            Error::Parse { .. } => "ParseError",
            Error::Validation(_) => "ValidationError",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::TooLarge { .. } => "TooLarge",
            Error::IndistinguishableMismatch { .. } => "IndistinguishableMismatch",
            Error::ProvenanceViolation => "ProvenanceViolation",
            Error::HighExpectationGroup { .. } => "HighExpectationGroup",
            Error::LowExpectationGroup { .. } => "LowExpectationGroup",
            Error::ConsistencyViolation(_) => "ConsistencyViolation",
            Error::Io(_) => "IoError",
        }
    }

    /// Process exit code: 2 params, 3 scheme preconditions, 4 info
    /// validity, 5 oracle cap, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BadParam { .. }
            | Error::Parse { .. }
            | Error::Validation(_)
            | Error::ShapeMismatch(_)
            | Error::NonUnitMass { .. }
            | Error::NegativeUtility { .. }
            | Error::BadProbability { .. }
            | Error::EmptyRound(_)
            | Error::NoRounds => 2,
            Error::ZeroAgentUtility
            | Error::NoPositiveUtility
            | Error::ZeroUtility
            | Error::HighExpectationGroup { .. }
            | Error::LowExpectationGroup { .. } => 3,
            Error::IndistinguishableMismatch { .. } | Error::ProvenanceViolation => 4,
            Error::TooLarge { .. } => 5,
            Error::ConsistencyViolation(_) | Error::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
