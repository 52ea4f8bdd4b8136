use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("not order preserving: {0}")]
    NotOrderPreserving(String),
    #[error("not a member: {0}")]
    NotMember(String),
    #[error("not a trace element: {0}")]
    NotTrace(String),
    #[error("order has no enumeration: {0}")]
    MissingEnumeration(String),
    #[error("range inclusion violated, witness {0}")]
    RangeInclusion(String),
    #[error("no cocone index found within window for {0}")]
    NoIndex(String),
    #[error("malformed tuple at line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("contradictory tuples: {0}")]
    Contradiction(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
