use thiserror::Error;

/// Failures raised by the core routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("permutation is not a bijection")]
    NonBijective,
    #[error("multiplier at point {index} has modulus {modulus}")]
    NotUnimodular { index: usize, modulus: f64 },
    #[error("permutation moves point {index} to a point of different weight")]
    NotMeasurePreserving { index: usize },
    #[error("function domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("shift leaves the stored support of a function that is not zero-extended")]
    OutOfDomain,
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("bad exponent: {0}")]
    BadExponent(String),
    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    QuadratureFailure { estimate: f64, tolerance: f64 },
    #[error("family index {index} outside [{first}, {last}]")]
    IndexOutOfRange { index: i64, first: i64, last: i64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("bound violated: {what}: {lhs:e} > {rhs:e}")]
    BoundViolated { what: String, lhs: f64, rhs: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
