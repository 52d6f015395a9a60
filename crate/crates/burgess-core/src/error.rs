//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by library operations.
///
/// Variants carry enough context to print an actionable message; they do not
/// wrap source errors because every failure here is a domain-level decision.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("character order {order} does not divide q-1 = {q_minus_one}")]
    OrderNotDividing { order: u64, q_minus_one: u64 },
    #[error("character order must be at least 2 (principal character excluded)")]
    OrderOne,

    #[error("parse error at byte {offset}: {message}")]
    ParseError { offset: usize, message: String },
    #[error("variable x{index} out of range at byte {offset} (dimension is {n})")]
    VariableOutOfRange {
        offset: usize,
        index: usize,
        n: usize,
    },
    #[error("system leaves variable x{0} without any monomial")]
    DegenerateSystem(usize),
    #[error("system must contain the linear monomial in x{0}")]
    MissingLinearMonomial(usize),

    #[error("degree {degree} of the reduced polynomial is not below q = {q}; decomposition would be unreliable")]
    DegreeTooLarge { degree: u64, q: u64 },
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial vanishes identically mod q = {0}")]
    ZeroModQ(u64),

    #[error("enumeration budget exceeded: {task} needs {required} units, budget is {budget}")]
    BudgetExceeded {
        task: &'static str,
        required: u128,
        budget: u128,
    },
    #[error("box-sum identity violated at collection {points:?}: relative deviation {deviation}")]
    IdentityViolation {
        deviation: f64,
        points: Vec<Vec<i64>>,
    },
    #[error("side lengths must be sorted non-decreasingly")]
    UnsortedSides,
    #[error("B-sum inequality violated at sides {sides:?}: lhs = {lhs}, rhs = {rhs}")]
    InequalityViolation {
        lhs: f64,
        rhs: f64,
        sides: Vec<u64>,
    },
    #[error("no predicted exponent is available for this system: {0}")]
    UnsupportedSystem(String),

    #[error("dimension must be at least 2 (n = {0}); the n = 1 convention is opt-in")]
    DimensionTooSmall(usize),
    #[error("parameters out of the valid range: {0}")]
    InvalidRange(String),
    #[error("the P window is empty: {0}")]
    EmptyWindow(String),
    #[error("kappa is too large: the optimizing r = {r} gives theta = {theta} <= M = {m}")]
    KappaTooLarge { r: u64, theta: u64, m: u64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("system is not translation-dilation invariant: {0}")]
    NotTDI(String),
}

pub type Result<T> = std::result::Result<T, Error>;
