use std::fmt;

use thiserror::Error;

/// A parse failure with its location and the tokens that would have been accepted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub expected: Vec<String>,
    pub found: String,
    pub message: Option<String>,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.col)?;
        if let Some(msg) = &self.message {
            return write!(f, "{msg}");
        }
        write!(f, "unexpected {}", self.found)?;
        if !self.expected.is_empty() {
            write!(f, ", expected one of: {}", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("bad interval: {0}")]
    BadInterval(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("time arithmetic underflow: {0}")]
    Underflow(String),
    #[error("variable `{0}` bound to a value of the wrong sort")]
    TypeMismatch(String),
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("formula is not ground: {0}")]
    NonGround(String),
    #[error("formula has no time interval: {0}")]
    Timeless(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("malformed model: {0}")]
    MalformedModel(String),
    #[error("malformed mental operation: {0}")]
    MalformedOp(String),
    #[error("no reduction axiom applies: {0}")]
    UnreducibleShape(String),
    #[error("malformed rule: {0}")]
    MalformedRule(String),
    #[error("no such belief: {0}")]
    NoSuchBelief(String),
    #[error("unsupported query: {0}")]
    UnsupportedQuery(String),
    #[error("inference budget of {0} steps exhausted")]
    BudgetExhausted(usize),
    #[error("perception at {at} precedes the clock {clock}")]
    TimeRegression { clock: u64, at: u64 },
    #[error("line {line}: expected `{query}` to be {expected}, got {actual}")]
    ExpectMismatch { line: usize, query: String, expected: bool, actual: bool },
    #[error("scenario line {line}: {message}")]
    Scenario { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
