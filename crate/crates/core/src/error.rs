use thiserror::Error;

use crate::oracle::Element;

/// Errors raised by oracles, algorithms, instance builders and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("element {element} is outside the ground set of size {ground}")]
    UnknownElement { element: Element, ground: usize },

    #[error("element {0} was already inserted")]
    DuplicateInsert(Element),

    #[error("oracle integrity: marginal {marginal} of element {element} is negative")]
    OracleIntegrity { element: Element, marginal: f64 },

    #[error("enumeration budget exceeded: {needed} candidates > budget {budget}{hint}")]
    BudgetExceeded { needed: u128, budget: u128, hint: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("unsupported stream operation: {0}")]
    UnsupportedOp(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::InvariantViolation(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    /// True for errors that signal a broken invariant rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, Error::InvariantViolation(_) | Error::OracleIntegrity { .. })
    }
}
