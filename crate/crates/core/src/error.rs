use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("modulus {0} is too large (must be below 2^32)")]
    ModulusTooLarge(u64),
    #[error("polynomials live over different fields (p = {0} and p = {1})")]
    FieldMismatch(u64, u64),
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("operation is undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial must be monic")]
    NotMonic,
    #[error("polynomial must have degree at least 1")]
    ConstantPolynomial,
    #[error("quadratic character requires odd characteristic, got p = 2")]
    EvenCharacteristic,
    #[error("enumeration of {size} points exceeds the cap of {cap}")]
    EnumerationCap { size: u128, cap: u64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("prime window ({lo}, {hi}] contains no primes")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("requested bound {requested} exceeds sieve limit {limit}")]
    SieveLimit { requested: u64, limit: u64 },
    #[error("subset is not contained in the ambient prime set")]
    NotSubset,
    #[error("expected degree {expected}, found {found}")]
    WrongDegree { expected: usize, found: usize },
}
