use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Validation and domain failures surfaced by the library.
///
/// Numeric results deliberately use IEEE infinities where the underlying
/// quantity diverges (log-probabilities, divergences, exponents); `Error` is
/// reserved for inputs that violate a documented precondition.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Paired sequences differ in length.
    LengthMismatch { left: usize, right: usize },
    /// An operation requires at least one sample.
    EmptyInput,
    /// A symbol index falls outside its alphabet.
    SymbolOutOfRange { symbol: usize, size: usize },
    /// A probability vector does not sum to one within tolerance.
    NotNormalized { total: f64 },
    /// A probability entry is negative or non-finite.
    BadProbability { value: f64 },
    /// A scalar parameter violates its documented domain.
    Domain(&'static str),
    /// An exact enumeration would exceed the configured cap.
    CapExceeded { needed: usize, cap: usize },
    /// No feasible solution exists under the given distortion budget.
    Infeasible(&'static str),
    /// An exponent fit was refused; the message explains why.
    FitRefused(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::EmptyInput => write!(f, "empty input"),
            Error::SymbolOutOfRange { symbol, size } => {
                write!(f, "symbol {symbol} outside alphabet of size {size}")
            }
            Error::NotNormalized { total } => {
                write!(f, "probabilities sum to {total}, expected 1")
            }
            Error::BadProbability { value } => write!(f, "invalid probability {value}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::CapExceeded { needed, cap } => {
                write!(f, "enumeration needs n = {needed} but cap is {cap}")
            }
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            Error::FitRefused(msg) => write!(f, "fit refused: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
