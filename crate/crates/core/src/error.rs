use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not estimable: {0}")]
    NotEstimable(String),

    /// A sweep point failed; carries the grid coordinate.
    #[error("at {coordinate}: {source}")]
    Point {
        coordinate: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn not_estimable(msg: impl Into<String>) -> Self {
        Error::NotEstimable(msg.into())
    }

    /// Strips any sweep-coordinate wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Point { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
