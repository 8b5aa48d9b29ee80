use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("zero denominator at position {pos}")]
    ZeroDenominator { pos: usize },

    #[error("division by zero")]
    DivisionByZero,

    /// A comparison whose answer lies beyond the known terms.
    #[error("undecidable at truncation: {0}")]
    Undecidable(String),

    #[error("truncation insufficient: {0}")]
    TruncationInsufficient(String),

    #[error("exponent denominator {den} exceeds limit {limit}")]
    DenominatorLimit { den: String, limit: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("sampler exhausted after {attempts} attempts")]
    Exhausted { attempts: usize },

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
