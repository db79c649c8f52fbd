use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A protocol participant, used to name the culprit of an identifiable abort.
///
/// Users are numbered from 0; workers carry their key-share index, which starts at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "role", content = "id", rename_all = "snake_case")]
pub enum Party {
    User(usize),
    Worker(usize),
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::User(i) => write!(f, "user {i}"),
            Party::Worker(j) => write!(f, "worker {j}"),
        }
    }
}

/// Termination caused by a provably misbehaving party.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Abort {
    pub culprit: Party,
    pub reason: String,
}

impl Abort {
    pub fn new(culprit: Party, reason: impl Into<String>) -> Self {
        Self {
            culprit,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for Abort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.culprit, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("setup failure: {0}")]
    Setup(String),
    #[error("plaintext {0} is outside the signed plaintext range")]
    PlaintextRange(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed encoding: {0}")]
    Decode(String),
    #[error("prover precondition violated: {0}")]
    Precondition(String),
    #[error("protocol abort by {0}")]
    Abort(Abort),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn abort(culprit: Party, reason: impl Into<String>) -> Self {
        Error::Abort(Abort::new(culprit, reason))
    }

    pub fn as_abort(&self) -> Option<&Abort> {
        match self {
            Error::Abort(a) => Some(a),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
