use thiserror::Error;

use crate::instance::AgentId;

#[derive(Debug, Error)]
pub enum MapfError {
    /// A caller violated an operation precondition.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// The agent's goal lies in a different connected component than its start.
    #[error("agent {agent} cannot reach its goal")]
    Unreachable { agent: AgentId },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("oracle refused: {0}")]
    OracleTooLarge(String),

    #[error("SAT backend: {0}")]
    Backend(String),

    /// Broken internal invariant (e.g. an encoding that decodes to a non-path).
    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl MapfError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        MapfError::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = MapfError> = std::result::Result<T, E>;
