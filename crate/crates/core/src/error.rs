use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge list contains no edges after dropping self-loops")]
    EmptyEdgeSet,
    #[error("vertex {0} does not exist in the graph")]
    UnknownVertex(u64),
    #[error("edge ({0}, {1}) does not exist in the graph")]
    UnknownEdge(u64, u64),
    #[error("invalid snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("source and target must differ (both are {0})")]
    SameEndpoints(VertexId),
    #[error("hop limit must be at least 2, got {0}")]
    HopLimitTooSmall(u32),
    #[error("vertex {vertex} out of range for a graph with {vertex_count} vertices")]
    VertexOutOfRange { vertex: VertexId, vertex_count: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum EnumerateError {
    #[error("join cut {cut} outside 1..={max}")]
    InvalidCut { cut: u32, max: u32 },
    #[error("join aborted: {tuples} materialized tuples exceed the cap of {cap}")]
    TupleCapExceeded { tuples: usize, cap: usize },
    #[error("edge ({src}, {dst}) has no attribute record")]
    MissingAttribute { src: VertexId, dst: VertexId },
    #[error("automaton label {label} on edge ({src}, {dst}) is outside 0..{label_count}")]
    LabelOutOfRange {
        src: VertexId,
        dst: VertexId,
        label: u32,
        label_count: u32,
    },
}

/// Raised by the brute-force oracles when their result cap is hit.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("oracle result cap of {cap} exceeded")]
pub struct CapExceeded {
    pub cap: usize,
}
