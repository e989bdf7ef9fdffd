use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alphabet mismatch: expected size {expected}, found {found}")]
    AlphabetMismatch { expected: usize, found: usize },

    #[error("not a permutation: {0}")]
    NotAPermutation(String),

    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },

    #[error("word must contain at least one symbol")]
    EmptyWord,

    #[error("{0} is not a prime power")]
    NotPrimePower(usize),

    #[error("field order {0} outside supported range 2..=4096")]
    FieldOrderOutOfRange(usize),

    #[error("multiplier is zero, affine map not invertible")]
    NotInvertible,

    #[error("field element {0} out of range")]
    FieldElementOutOfRange(usize),

    #[error("at least one generator is required")]
    NoGenerators,

    #[error("group order cap exceeded: {partial} elements found, cap is {cap}")]
    OrderCapExceeded { partial: usize, cap: usize },

    #[error("alphabet cap exceeded: size {size}, cap is {cap}")]
    AlphabetCapExceeded { size: usize, cap: usize },

    #[error("invalid group family: {0}")]
    InvalidFamily(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("log base must be positive and different from 1, got {0}")]
    InvalidLogBase(f64),

    #[error("no closed form for generator-defined groups")]
    NoClosedForm,

    #[error(
        "exact computation needs {subsets} subset evaluations, cap is {cap}; use the Monte Carlo estimator instead"
    )]
    ExactTooLarge { subsets: u128, cap: u128 },

    #[error("brute force enumeration too large: {0}")]
    BruteForceTooLarge(String),

    #[error("length mismatch: plaintext has {plain} symbols, ciphertext has {cipher}")]
    LengthMismatch { plain: usize, cipher: usize },

    #[error("message length must be at least 1")]
    ZeroLength,

    #[error("message length {length} is not a multiple of the block length {block}")]
    NotBlockAligned { length: usize, block: usize },

    #[error("representative element {0} is not in the set")]
    RepresentativeNotInSet(usize),

    #[error("element index {index} out of range for group of order {order}")]
    ElementOutOfRange { index: usize, order: usize },

    #[error("Monte Carlo needs at least 100 samples, got {0}")]
    TooFewSamples(usize),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Cap violations map to a dedicated process exit code in the CLI.
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(
            self,
            Error::OrderCapExceeded { .. }
                | Error::AlphabetCapExceeded { .. }
                | Error::ExactTooLarge { .. }
                | Error::BruteForceTooLarge(_)
                | Error::FieldOrderOutOfRange(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
