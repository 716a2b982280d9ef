use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid game spec: {0}")]
    InvalidSpec(String),
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("search budget exhausted after {nodes} nodes")]
    BudgetExhausted { nodes: u64 },
    #[error("invalid end-game state: {0}")]
    InvalidState(String),
    #[error("rule precondition violated: {0}")]
    RuleViolation(String),
    #[error("verification incomplete: {0}")]
    Unverified(String),
    #[error("no secret is consistent with answer sequence {0}")]
    InfeasibleSequence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
