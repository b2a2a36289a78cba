use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("value error: {0}")]
    Value(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EditError {
    #[error("unknown primitive id '{0}'")]
    UnknownId(String),
    #[error("rotation axis is zero or not finite")]
    DegenerateAxis,
    #[error("scale factors must be positive and finite")]
    NonPositiveScale,
    #[error("unknown node '{0}'")]
    UnknownNode(String),
    #[error("node '{0}' is a leaf, not an operator")]
    LeafNotOperator(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("resolution {0} out of range [8, 1024]")]
    ResolutionOutOfRange(u32),
    #[error("grid of {samples} samples exceeds the limit of {limit}")]
    OutOfMemory { samples: u64, limit: u64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("no recognition records")]
    EmptyInput,
    #[error("record '{0}' has zero total utterances")]
    ZeroTotal(String),
}

/// A malformed line in a session script.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}
