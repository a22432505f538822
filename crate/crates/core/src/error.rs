use std::fmt;

use thiserror::Error;

/// Identifies one unit of work in a distributed run: a data subdomain
/// (window), a quasiprobability term and a circuit fragment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JobId {
    pub subdomain: usize,
    pub term: usize,
    pub fragment: usize,
}

impl JobId {
    pub fn new(subdomain: usize, term: usize, fragment: usize) -> Self {
        Self { subdomain, term, fragment }
    }
}

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "job({}/{}/{})", self.subdomain, self.term, self.fragment)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// A value outside the domain an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("cannot normalize an all-zero vector")]
    Normalization,
    #[error("circuit error: {0}")]
    Circuit(String),
    /// The request is valid but too large for the dense backends.
    #[error("resource error: {0}")]
    Resource(String),
    #[error("planning error: {0}")]
    Planning(String),
    #[error("aggregation error: {0}")]
    Aggregation(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("{id} failed: {source}")]
    Job {
        id: JobId,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse { offset, message: message.into() }
    }

    /// Coarse classification used by front ends to pick an exit status.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. } | Error::Config(_) | Error::Io(_) => ErrorKind::Input,
            Error::Resource(_) => ErrorKind::Resource,
            Error::Job { source, .. } => source.kind(),
            _ => ErrorKind::Numerical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad files, flags or configuration.
    Input,
    /// Exceeded a size limit of a dense backend or of the term enumerator.
    Resource,
    /// Everything raised by the numerical core.
    Numerical,
}

pub type Result<T> = std::result::Result<T, Error>;
