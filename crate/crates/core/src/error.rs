use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A family parameter, natural parameter or mean lies outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Malformed caller input (empty vectors, NaN entries, bad permutations, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    /// The variance regularity condition fails at the given mean.
    #[error("variance assumption violated at mean {mu}: b''={variance} < {required}")]
    AssumptionViolated {
        mu: f64,
        variance: f64,
        required: f64,
    },

    #[error("construction failed: {0}")]
    ConstructionFailed(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::InvalidInput(_)
                | Error::LengthMismatch { .. }
                | Error::TooLarge(_)
                | Error::Csv(_)
        )
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}
