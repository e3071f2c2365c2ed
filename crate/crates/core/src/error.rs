use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("{0} is not congruent to 3 mod 4")]
    NotThreeModFour(u32),
    #[error("no primitive polynomial of degree {0} in the table (supported: 2..=16)")]
    NoPrimitivePolynomial(u32),
    #[error("requested {requested} codewords but the Johnson bound is {bound}")]
    JohnsonBoundExceeded { requested: usize, bound: u64 },
    #[error("search exhausted: requested {requested} codewords, found at most {found}")]
    SearchExhausted { requested: usize, found: usize },
    #[error("partition oversubscribed: {requested} codewords requested, {available} available")]
    Oversubscribed { requested: usize, available: usize },
    #[error("codeword index {index} is outside the code (length {len}) or repeated")]
    BadCodewordIndex { index: usize, len: usize },
    #[error("constellation of size {size} exceeds the enumeration cap {cap}")]
    ConstellationTooLarge { size: u128, cap: u128 },
    #[error("high-SNR bound invalid: alpha*N = {alpha_n} >= w = {w}; use the MAI approximation")]
    RegimeViolation { alpha_n: usize, w: usize },
    #[error("log argument is not positive at slot {slot}")]
    NonPositiveLogArgument { slot: usize },
    #[error("enumeration needs {terms} terms, limit is {limit}")]
    EnumerationLimit { terms: u128, limit: u128 },
    #[error("signal has zero average")]
    ZeroAverage,
    #[error("negative intensity {value} at slot {slot}")]
    NegativeIntensity { slot: usize, value: f64 },
    #[error("detector {detector} cannot decode scheme {scheme}")]
    IncompatibleDetector {
        detector: &'static str,
        scheme: &'static str,
    },
}
