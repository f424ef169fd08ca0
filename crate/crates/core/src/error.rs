use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(u32, u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("q-integer [{m}] is undefined at level {n} (need 1 <= m < n)")]
    QIntegerOutOfRange { m: i64, n: u32 },
    #[error("prime {prime} divides a denominator")]
    PrimeExcluded { prime: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("root exponent {exponent} is not coprime to level {level}")]
    InvalidExponent { exponent: i64, level: u32 },
    #[error("precision {0} bits is below the minimum of 64")]
    PrecisionTooLow(usize),
    #[error("operation needs a non-empty index")]
    EmptyIndex,
    #[error("operation needs an hbar-free element")]
    HbarPresent,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("rank certificate failed: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
