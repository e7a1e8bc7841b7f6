use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("alphabet mismatch: expected {expected}, found {found}")]
    AlphabetMismatch { expected: usize, found: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid distortion matrix: {0}")]
    InvalidDistortion(String),

    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },

    #[error("empty sequence")]
    EmptySequence,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("solver did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("infeasible rate: R = {rate} is below H(X) = {entropy}")]
    InfeasibleRate { rate: f64, entropy: f64 },

    #[error("resource guard: {what} needs {requested} but the limit is {limit}")]
    ResourceGuard {
        what: &'static str,
        requested: f64,
        limit: f64,
    },

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("inconsistent type: {0}")]
    InconsistentType(String),

    #[error("regime violation: {0}")]
    RegimeViolation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
