use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-integer power of a value that is not a single infinitesimal term")]
    NonIntegerPowerOfSum,
    #[error("non-integer power of a term with negative coefficient")]
    NegativeBase,
    #[error("invalid exponent {0}: expected a natural number or a rational >= 1")]
    InvalidExponent(String),
    #[error("term index {index} out of range (value has {len} infinitesimal terms)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("factor is not a nonzero infinitesimal")]
    NotInfinitesimal,
    #[error("value with zero standard part is not invertible")]
    NotInvertible,

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid JSON: {0}")]
    Json(String),

    #[error("domain error: {0}")]
    Domain(String),
    #[error("point outside the function domain: {0}")]
    OutOfDomain(String),
    #[error("quadrature did not reach tolerance after {subdivisions} subdivisions (error estimate {estimate:e})")]
    ToleranceNotReached { subdivisions: usize, estimate: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("boxes are not pairwise disjoint")]
    NotDisjoint,
    #[error("integration over an unbounded region")]
    Unbounded,
    #[error("invalid interval: lower endpoint exceeds upper endpoint")]
    InvalidInterval,

    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("infinitesimal parallelepiped has zero volume")]
    ZeroVolume,
    #[error("values are not proportional by a real factor")]
    NotProportional,
    #[error("division by a zero infinitesimal")]
    ZeroDivisor,
}

impl Error {
    pub(crate) fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        Error::Syntax {
            pos,
            msg: msg.into(),
        }
    }

    /// Errors that come from malformed input text rather than mathematics.
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. } | Error::UnknownVariable(_) | Error::Json(_)
        )
    }
}
