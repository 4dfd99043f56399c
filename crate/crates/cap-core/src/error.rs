use alloc::string::String;
use alloc::vec::Vec;

use crate::types::Violation;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid corpus: {} violation(s), first: {}", .0.len(), .0.first().map(|v| alloc::format!("{v}")).unwrap_or_default())]
    InvalidCorpus(Vec<Violation>),
    #[error("duplicate sequence id `{0}`")]
    DuplicateId(String),
    #[error("feature data of length {len} is not a whole number of {dim}-dimensional frames")]
    RaggedFrames { len: usize, dim: usize },
    #[error("feature dimension must be at least 1")]
    ZeroDimension,
    #[error("underdetermined clustering: {frames} frames for {k} clusters")]
    Underdetermined { frames: usize, k: usize },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown sequence id `{0}`")]
    UnknownSequence(String),
    #[error("score matrix for `{0}` is already refined")]
    AlreadyRefined(String),
    #[error("no histogram bin exceeds theta = {theta}")]
    EmptyPath { theta: f64 },
    #[error("path of {steps} steps is longer than the {frames}-frame sequence")]
    PathTooLong { steps: usize, frames: usize },
    #[error("temporal path must be non-empty with no repeated consecutive steps")]
    InvalidPath,
    #[error("cluster id {id} out of range for {k} clusters")]
    ClusterOutOfRange { id: usize, k: usize },
    #[error("length mismatch for `{id}`: {expected} frames vs {found} labels")]
    LengthMismatch { id: String, expected: usize, found: usize },
    #[error("label mapping is not injective")]
    NonInjectiveMapping,
    #[error("invalid configuration: {0}")]
    Config(&'static str),
}
