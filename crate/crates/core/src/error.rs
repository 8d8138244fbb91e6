use thiserror::Error;

/// Errors raised by the change-point library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A distribution or prior parameter lies outside its domain.
    #[error("parameter domain: {0}")]
    ParameterDomain(String),

    /// A structural precondition (sizes, indices, orderings) does not hold.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("moment undefined: {0}")]
    MomentUndefined(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Numeric routine stopped before reaching the requested accuracy.
    #[error("accuracy not reached: achieved bound {achieved:e}, requested {requested:e}")]
    Accuracy { achieved: f64, requested: f64 },

    #[error("non-convergence: {0}")]
    NonConvergence(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("prior undefined: {0}")]
    PriorUndefined(String),

    #[error("posterior undefined: {0}")]
    PosteriorUndefined(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("replicate {replicate}: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of numeric routines as opposed to bad user input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Accuracy { .. } | Error::NonConvergence(_) | Error::PosteriorUndefined(_) => true,
            Error::Replicate { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
