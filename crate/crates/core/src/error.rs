use thiserror::Error;

use crate::syntax::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for domain of size {size}")]
    VertexOutOfRange { vertex: usize, size: usize },

    #[error("relation `{0}` is not in the signature")]
    UnknownRelation(String),

    #[error("relation `{relation}` has arity {expected}, found {found} arguments")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid signature: {0}")]
    Signature(String),

    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    /// Malformed input file; the message carries the position of the fault.
    #[error("{0}")]
    Load(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("free variable x{0} has no assigned vertex")]
    UnassignedVariable(u32),

    #[error("stone pairing is undefined on an empty domain")]
    EmptyDomain,

    #[error("estimated work {estimate} exceeds the limit of {limit} (raise the limit to override)")]
    WorkLimit { estimate: String, limit: u128 },

    #[error("interpretation scheme: {0}")]
    Scheme(String),

    #[error("rooted forest: {0}")]
    Forest(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}
