use thiserror::Error;

/// A syntax error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }
}

/// Runtime failures of the Cypher and SQL interpreters.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("type error: {0}")]
    Type(String),
    #[error("integer overflow")]
    Overflow,
    #[error("division by zero")]
    DivisionByZero,
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("ambiguous attribute `{0}`")]
    AmbiguousAttribute(String),
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("ill-formed query: {0}")]
    IllFormed(String),
}

/// Crate-level error.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("ill-formed query: {0}")]
    IllFormed(String),
    #[error("transformer error: {0}")]
    Transform(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
