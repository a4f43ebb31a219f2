use thiserror::Error;

use crate::graph::ValidationReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge set does not cover every vertex exactly once")]
    NotPerfectMatching,
    #[error("ancilla vertex {vertex} covered at mode {mode} but has dimension {dimension}")]
    AncillaModeOutOfRange { vertex: usize, mode: usize, dimension: usize },
    #[error("vertex {vertex} covered at mode {mode} but has dimension {dimension}")]
    ModeOutOfRange { vertex: usize, mode: usize, dimension: usize },
    #[error("edge {edge} references missing vertex {vertex}")]
    BadEndpoint { edge: usize, vertex: usize },
    #[error("state vanishes: every term cancels")]
    StateVanishes,
    #[error("shape mismatch: expected dims {expected:?}, found {found:?}")]
    ShapeMismatch { expected: Vec<usize>, found: Vec<usize> },
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("odd vertex count {0}: no perfect matching can exist")]
    OddVertexCount(usize),
    #[error("graph has no input vertices")]
    NoInputVertices,
    #[error("invalid graph: {0}")]
    InvalidGraph(ValidationReport),
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("cancelled")]
    Cancelled,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
