use thiserror::Error;

/// Errors raised by the geometry, coding and search layers.
///
/// Variants that correspond to a falsified mathematical statement
/// (`AssertionFailed`, `NotInDual`, `SearchExhausted`, `InconsistentInput`)
/// carry enough context to be serialized as counterexample reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NonPrime(u32),
    #[error("no irreducible modulus known for GF({0}^{1}); supply one explicitly")]
    NoModulusKnown(u32, u32),
    #[error("modulus {0:?} is reducible over the prime field")]
    ReducibleModulus(Vec<u32>),
    #[error("unsupported field parameters: {0}")]
    UnsupportedField(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty input")]
    EmptyInput,
    #[error("field reduction needs a proper extension field (h > 1)")]
    PrimeFieldInput,
    #[error("spread element {0} is not part of the spread or not distinct")]
    ElementNotInSpread(usize),
    #[error("no transversal line: {0}")]
    NoTransversal(String),
    #[error("combination has no nonzero coefficient")]
    EmptyCombination,
    #[error("vector is not a codeword of C")]
    NotInCode,
    #[error("codeword weight {weight} is not below 2q^(n-1) = {limit}")]
    NotSmall { weight: usize, limit: usize },
    #[error("assertion failed: {0}")]
    AssertionFailed(String),
    #[error("point {0} lies in the support")]
    PointInSupport(usize),
    #[error("point {0} lies on no tangent line to the support")]
    NoTangentThroughR(usize),
    #[error("point {0} lies on the target hyperplane")]
    PointOnHyperplane(usize),
    #[error("plane is not a 2-dimensional subspace of the ambient space")]
    PlaneNotInSpace,
    #[error("point set is not a blocking set with respect to lines")]
    NotBlocking,
    #[error("point set does not meet every line in 1 (mod p) points")]
    NotOneModP,
    #[error("subspace has dimension {found}, expected {expected}")]
    WrongDimension { expected: i64, found: i64 },
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
    #[error("blocking set is a hyperplane")]
    IsHyperplane,
    #[error("search exhausted without a witness: {0}")]
    SearchExhausted(String),
    #[error("exponent e={e} invalid for h={h} (need 1 <= e < h and e | h)")]
    BadExponent { e: u32, h: u32 },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("word is not orthogonal to line {0}")]
    NotInDual(usize),
    #[error("field order {0} is not a square")]
    NotSquareOrder(u32),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
