use thiserror::Error;

/// Errors raised while constructing or validating graphs and state spaces.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExlabError {
    #[error("vertex {v} out of range for graph with {n} vertices")]
    VertexOutOfRange { v: usize, n: usize },
    #[error("self-loop at vertex {v}")]
    SelfLoop { v: usize },
    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: usize, v: usize },
    #[error("nonpositive conductance {c} on edge ({u}, {v})")]
    NonpositiveConductance { u: usize, v: usize, c: f64 },
    #[error("graph is disconnected")]
    DisconnectedGraph,
    #[error("torus side length {side} < 3 would create multi-edges")]
    TorusSideTooSmall { side: usize },
    #[error("reduction requires at least 3 vertices, got {n}")]
    TooFewVertices { n: usize },
    #[error("x and y must be distinct vertices (got {v})")]
    SameVertex { v: usize },
    #[error("linear system is singular")]
    SingularSystem,
    #[error("dense solve limited to {limit} vertices, got {n}")]
    DenseSolveTooLarge { n: usize, limit: usize },
    #[error("state space of size {size} exceeds the enumeration cap {cap}")]
    StateSpaceTooLarge { size: u128, cap: u128 },
    #[error("state function defined on a mismatched space (expected {expected} states, got {got})")]
    SpaceMismatch { expected: usize, got: usize },
    #[error("denominator form vanishes identically")]
    DegenerateDenominator,
    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, ExlabError>;
