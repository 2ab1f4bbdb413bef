use std::fmt;

use collapse_core::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DEGENERATE: u8 = 3;
pub const EXIT_INVARIANT: u8 = 4;

/// A command failure carrying its exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Malformed flags, specs or files (exit 2).
    Usage(String),
    /// Well-formed input that violates a model invariant (exit 4).
    Invariant(String),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Invariant(_) => EXIT_INVARIANT,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "error: {m}"),
            Self::Invariant(m) => write!(f, "invariant violation: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        match err {
            Error::Json(_) | Error::InvalidData(_) | Error::DimensionMismatch { .. } => Self::Usage(err.to_string()),
            other => Self::Invariant(other.to_string()),
        }
    }
}

pub type CmdResult<T> = std::result::Result<T, Failure>;
