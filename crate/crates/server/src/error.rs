use mylibrary_core::model::Violation;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} not found")]
    NotFound(String),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("validation failed: {}", join(.0))]
    Validation(Vec<Violation>),
    #[error("forbidden")]
    Forbidden,
    #[error("authentication failed")]
    AuthenticationFailed,
    #[error("discipline is referenced by {users} users and {librarians} librarians")]
    Referenced { users: usize, librarians: usize },
    #[error("another run is in progress")]
    Busy,
    #[error("mail transport: {0}")]
    Transport(String),
    #[error("storage: {0}")]
    Storage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub fn not_found(what: impl std::fmt::Display) -> Self {
        Error::NotFound(what.to_string())
    }

    pub fn invalid(why: impl std::fmt::Display) -> Self {
        Error::InvalidArgument(why.to_string())
    }
}
