use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular: {0}")]
    Singular(String),
    #[error("insufficient coefficients: exponents up to {required} are needed")]
    InsufficientCoefficients { required: f64 },
    #[error("not modular: {0}")]
    NotModular(String),
    #[error("missing multiplier for {0}; call infer_multiplier first")]
    MissingMultiplier(String),
    #[error("path conflict: {0}")]
    PathConflict(String),
    #[error("divergent parameters: {0}")]
    Divergent(String),
    #[error("refinement budget exhausted: achieved err {achieved:e}, wanted {wanted:e}")]
    Refinement { achieved: f64, wanted: f64 },
    #[error("unsupported cusp {0}")]
    UnsupportedCusp(String),
}

impl Error {
    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Argument(_) | Error::Parse { .. } | Error::Io(_))
    }
}
