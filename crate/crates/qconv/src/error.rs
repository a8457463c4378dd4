use thiserror::Error;

/// Errors raised by constructors, solvers and simulators.
#[derive(Debug, Error)]
pub enum Error {
    /// Input failed a structural or numerical validity check.
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NonUnitary(f64),
    #[error("state is not normalized (norm {0:.12})")]
    Unnormalized(f64),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("resource budget exceeded: {0}")]
    Budget(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by bad user input rather than runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::Dimension { .. } | Error::Parse(_) | Error::Unnormalized(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
