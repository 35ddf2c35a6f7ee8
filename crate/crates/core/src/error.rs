use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode surfaced by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "series for |z| = {modulus} did not reach a term ratio below 1/2 within {max_terms} terms"
    )]
    NonConverged { max_terms: usize, modulus: f64 },

    #[error("|z| = {modulus} with |arg z| = {arg} lies in the exponential-growth sector |arg z| < {limit}")]
    UnsupportedRegion { modulus: f64, arg: f64, limit: f64 },

    #[error("linear change is singular (|det| = {det:e})")]
    SingularTransform { det: f64 },

    #[error("reduction is ill-conditioned (condition {condition:e} exceeds {limit:e})")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("cell budget of {budget} exhausted with error estimate {error_estimate:e}")]
    BudgetExceeded { budget: usize, error_estimate: f64 },

    #[error("amplitude is not in L^p: {0}")]
    DivergentNorm(String),

    #[error("phase class {0} carries no decay estimate")]
    UnsupportedClass(String),

    #[error("lambda range spans {decades:.3} decades, more than 2 are required")]
    InsufficientDecades { decades: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConverged { .. }
            | Error::BudgetExceeded { .. }
            | Error::IllConditioned { .. } => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidInput(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be finite, got {x}"
        )))
    }
}
