use thiserror::Error;

use crate::graph::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed text input. `line` is 1-based when known.
    #[error("{}", match line { Some(l) => format!("line {l}: {message}"), None => message.clone() })]
    Input { line: Option<usize>, message: String },

    #[error("invalid graph: {0}")]
    Graph(#[from] Violation),

    #[error("{0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Exact enumeration would exceed its configured size limit.
    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("malformed sample file: {0}")]
    SampleFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(line: usize, message: impl Into<String>) -> Self {
        Error::Input { line: Some(line), message: message.into() }
    }

    pub(crate) fn param(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }

    /// Resource-cap and enumeration-size failures, as opposed to bad input.
    pub fn is_resource_error(&self) -> bool {
        matches!(self, Error::ResourceCap(_) | Error::TooLarge(_))
    }
}
