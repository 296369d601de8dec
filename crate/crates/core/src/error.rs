use thiserror::Error;

/// Errors raised by field construction, evaluation and verification.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("p = {0} is not prime")]
    NotPrime(u32),
    #[error("characteristic must be odd, got p = {0}")]
    EvenCharacteristic(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{r} exceeds the configured bound {bound}")]
    OrderTooLarge { p: u32, r: u32, bound: u64 },
    #[error("operands belong to different fields (q = {left} and q = {right})")]
    ContextMismatch { left: u32, right: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("discrete logarithm of zero is undefined")]
    ZeroLog,
    #[error("division by zero")]
    ZeroDenominator,
    #[error("cannot parse field element {0:?} (expected \"0\" or \"g^k\")")]
    ParseElement(String),
    #[error("cannot parse character {0:?} (expected \"chi_k\" or an integer index)")]
    ParseCharacter(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error("value is not invertible: {0}")]
    NotInvertible(String),
    #[error("sampling requires {0}")]
    SamplingConfig(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
