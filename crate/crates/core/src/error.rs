use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Each variant has a stable kebab-case code (see [`Error::code`]) that the
/// CLI forwards verbatim in its machine-readable error output.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zero-denominator")]
    ZeroDenominator,
    #[error("backend-mismatch: exact and float scalars cannot be combined")]
    BackendMismatch,
    #[error("division-by-zero")]
    DivisionByZero,
    #[error("parse-error: {0}")]
    Parse(String),

    #[error("component-out-of-range: component {index} is {value}")]
    ComponentOutOfRange { index: usize, value: String },
    #[error("sum-not-one: components sum to {0}")]
    SumNotOne(String),
    #[error("too-few-components: got {0}, need at least 2")]
    TooFewComponents(usize),
    #[error("zero-count-too-large: {zero_count} zeros requested for n = {n}")]
    ZeroCountTooLarge { n: usize, zero_count: usize },
    #[error("invalid-grid: {0}")]
    InvalidGrid(String),

    #[error("nonlinear-additive-needs-exact: additive map with a Hamel tail evaluated on a float")]
    NonlinearAdditiveNeedsExact,
    #[error("nonpositive-exponent: {0}")]
    NonpositiveExponent(String),
    #[error("out-of-interval: {0} is not in [0, 1]")]
    OutOfInterval(String),
    #[error("table-miss: no table entry at {0}")]
    TableMiss(String),
    #[error("duplicate-abscissa: {0}")]
    DuplicateAbscissa(String),

    #[error("lambda-zero")]
    LambdaZero,
    #[error("k-too-small: k = {0}, need k >= 3")]
    KTooSmall(usize),
    #[error("arity-too-small: {0}")]
    ArityTooSmall(String),
    #[error("constraint-2.5-violated: A(1) + sum c_j = {0}")]
    Constraint25Violated(String),
    #[error("case-condition-violated: phi(1) + (n-1) phi(0) = {0}")]
    CaseConditionViolated(String),
    #[error("B1-nonzero: B(1) = {0}")]
    BigB1Nonzero(String),
    #[error("b1-nonzero: b(1) = {0}")]
    SmallB1Nonzero(String),
    #[error("c-zero: f(1) + (n-1) f(0) vanishes")]
    CZero,
    #[error("f1-zero: leading factor f(1) vanishes")]
    F1Zero,
    #[error("A*-constraint-violated: A*(1) = {got}, expected {expected}")]
    AStarConstraintViolated { got: String, expected: String },

    #[error("alpha-is-one")]
    AlphaIsOne,

    #[error("arity-mismatch: {0}")]
    ArityMismatch(String),
    #[error("unsupported-equation: {0}")]
    UnsupportedEquation(String),

    #[error("degenerate-abscissae")]
    DegenerateAbscissae,
    #[error("too-few-points: {0}")]
    TooFewPoints(String),
    #[error("insufficient-interior-points: {0} points inside (0, 1), need 3")]
    InsufficientInteriorPoints(usize),
    #[error("no-convergence")]
    NoConvergence,
    #[error("system-too-large: {unknowns} unknowns exceeds cap {cap}")]
    SystemTooLarge { unknowns: usize, cap: usize },

    #[error("schema-violation at {pointer}: {message}")]
    SchemaViolation { pointer: String, message: String },
    #[error("unknown-form: {0}")]
    UnknownForm(String),
}

impl Error {
    /// Stable identifier of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ZeroDenominator => "zero-denominator",
            Error::BackendMismatch => "backend-mismatch",
            Error::DivisionByZero => "division-by-zero",
            Error::Parse(_) => "parse-error",
            Error::ComponentOutOfRange { .. } => "component-out-of-range",
            Error::SumNotOne(_) => "sum-not-one",
            Error::TooFewComponents(_) => "too-few-components",
            Error::ZeroCountTooLarge { .. } => "zero-count-too-large",
            Error::InvalidGrid(_) => "invalid-grid",
            Error::NonlinearAdditiveNeedsExact => "nonlinear-additive-needs-exact",
            Error::NonpositiveExponent(_) => "nonpositive-exponent",
            Error::OutOfInterval(_) => "out-of-interval",
            Error::TableMiss(_) => "table-miss",
            Error::DuplicateAbscissa(_) => "duplicate-abscissa",
            Error::LambdaZero => "lambda-zero",
            Error::KTooSmall(_) => "k-too-small",
            Error::ArityTooSmall(_) => "arity-too-small",
            Error::Constraint25Violated(_) => "constraint-2.5-violated",
            Error::CaseConditionViolated(_) => "case-condition-violated",
            Error::BigB1Nonzero(_) => "B1-nonzero",
            Error::SmallB1Nonzero(_) => "b1-nonzero",
            Error::CZero => "c-zero",
            Error::F1Zero => "f1-zero",
            Error::AStarConstraintViolated { .. } => "A*-constraint-violated",
            Error::AlphaIsOne => "alpha-is-one",
            Error::ArityMismatch(_) => "arity-mismatch",
            Error::UnsupportedEquation(_) => "unsupported-equation",
            Error::DegenerateAbscissae => "degenerate-abscissae",
            Error::TooFewPoints(_) => "too-few-points",
            Error::InsufficientInteriorPoints(_) => "insufficient-interior-points",
            Error::NoConvergence => "no-convergence",
            Error::SystemTooLarge { .. } => "system-too-large",
            Error::SchemaViolation { .. } => "schema-violation",
            Error::UnknownForm(_) => "unknown-form",
        }
    }

    pub(crate) fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::SchemaViolation {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}
