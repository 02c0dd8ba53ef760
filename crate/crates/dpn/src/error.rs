use thiserror::Error;

/// Construction-time and input-validation failures.
///
/// Arithmetic on already-validated elements panics on shape mismatches
/// instead of returning these: mixing moduli or lengths is a programming
/// error, not an input error.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("modulus {0} exceeds the supported limit 2^31 - 1")]
    PrimeTooLarge(u64),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("element has a nonzero x-part, so it is not a scalar differential operator")]
    NotScalarOperator,

    #[error("element has a nonzero differential part, so it is not a polynomial")]
    NotPolynomial,

    #[error("seed {index} is inadmissible: {reason}")]
    SeedPrecondition { index: usize, reason: String },

    #[error("parameter u[{i}][{k}] is not supported on the punctured cube: {reason}")]
    BadParameter { i: usize, k: usize, reason: String },

    #[error("perturbation coefficient at {at} is not a constant of the derivation")]
    NotConstant { at: String },

    #[error("element does not lie in the expected filtration piece: {0}")]
    OutsideFiltration(String),

    #[error("invalid JSON element: {0}")]
    Json(String),

    #[error("{0}")]
    Invalid(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
