use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: bad JSON, unknown keys, empty or duplicate ids.
    #[error("parse error: {0}")]
    Parse(String),
    /// The model parsed but breaks one or more semantic rules.
    #[error("invalid model: {}", summarize(.0))]
    Invalid(Vec<Violation>),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    /// The operation needs a model shape this one does not have.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// The data contradicts itself in a way validation does not catch.
    #[error("inconsistent model: {0}")]
    Inconsistent(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

fn summarize(v: &[Violation]) -> String {
    match v.first() {
        Some(first) if v.len() == 1 => first.to_string(),
        Some(first) => format!("{} (and {} more)", first, v.len() - 1),
        None => "no violations".into(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
