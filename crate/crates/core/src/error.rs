use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("Bernoulli number B_{0} requested for odd index > 1")]
    OddBernoulli(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0} is not prime (or is below 5)")]
    BadPrime(u64),

    #[error("denominator divisible by {p} at {location}")]
    PDivisibleDenominator { p: u64, location: String },

    #[error("{op} requires a {expected} polynomial")]
    WrongKind { op: &'static str, expected: &'static str },

    #[error("{op} requires a P-free (modular) input")]
    NotModular { op: &'static str },

    #[error("weight mismatch: {0} vs {1}")]
    WeightMismatch(u32, u32),

    #[error("modulus mismatch: p^m = {0}^{1} vs {2}^{3}")]
    ModulusMismatch(u64, u32, u64, u32),

    #[error("-{0} is not a discriminant")]
    NotDiscriminant(u64),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("degenerate triple: q^3 = r^2")]
    Degenerate,

    #[error("value {value} has denominator outside Z[1/6]")]
    NotSixIntegral { value: String },

    #[error("registry error: {0}")]
    Registry(String),
}
