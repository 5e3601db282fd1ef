use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no tabulated divisor for n = {0} (tables cover 1..=50)")]
    Lookup(u32),

    #[error("missing fields: {0}")]
    MissingFields(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("quadrature did not converge: estimate {estimate}, error {error_estimate:e} after {intervals} intervals")]
    Quadrature {
        estimate: f64,
        error_estimate: f64,
        intervals: usize,
    },

    #[error("singular design matrix: {0}")]
    SingularDesign(String),

    #[error("transform error: {0}")]
    Transform(String),

    #[error("data integrity error: {0}")]
    DataIntegrity(String),

    #[error("malformed fixture: {0}")]
    Fixture(String),
}

pub type Result<T> = std::result::Result<T, Error>;
