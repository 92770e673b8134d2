use thiserror::Error;

/// Errors raised by carrier arithmetic, function evaluation and the checks
/// built on top of them.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("descriptor mismatch: expected {expected}, found {found}")]
    DescriptorMismatch { expected: String, found: String },

    #[error("carrier {0} has no zero element")]
    NoZeroElement(String),

    #[error("multiplication by {m}! is not bijective on {carrier}")]
    DivisibilityUnavailable { carrier: String, m: usize },

    #[error("carrier {0} is infinite")]
    InfiniteCarrier(String),

    #[error("budget exceeded: {needed} evaluations requested, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("syntax error at position {position}: {message}")]
    SyntaxError { position: usize, message: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("negative exponent at position {0}")]
    NegativeExponent(usize),

    #[error("no table entry for {0}")]
    MissingEntry(String),

    #[error("arity mismatch: expected {expected} arguments, got {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("codomain {0} carries no ring structure")]
    NonRingCodomain(String),

    #[error("{0} is not a group")]
    NotAGroup(String),

    #[error("not a polynomial function: {0}")]
    NotPolynomial(String),

    #[error("basepoint is not an element of {0}")]
    NoBasepoint(String),

    #[error("map is not multiadditive: {0}")]
    NotMultiadditive(String),

    #[error("carrier {0} is not cancellative")]
    NonCancellative(String),

    #[error("invalid element for {carrier}: {reason}")]
    InvalidElement { carrier: String, reason: String },

    #[error("value {value} does not lie in codomain {carrier}")]
    ValueOutsideCodomain { carrier: String, value: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
