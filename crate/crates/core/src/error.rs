use thiserror::Error;

/// Errors raised by graph, group and ensemble construction and by the exact evaluators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("energy form is not positive definite (graph is not transient)")]
    NotTransient,
    #[error("step {from} -> {to} is not an edge of the graph")]
    NotAnEdge { from: usize, to: usize },
    #[error("network is not Eulerian at vertex {0}")]
    NotEulerian(usize),
    #[error("network is not supported on the edges of the graph at ({0}, {1})")]
    OffSupport(usize, usize),
    #[error("even network has an odd half-degree at vertex {0}")]
    OddVertex(usize),
    #[error("enumeration budget of {0} entries exceeded")]
    BudgetExceeded(usize),
    #[error("determinant vanishes along the continuation path; fractional power is not evaluable")]
    BranchFailure,
    #[error("quadratic form is not positive definite")]
    IndefiniteForm,
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),
    #[error("no loop with non-trivial homotopy up to length {0}")]
    NoPlaquette(usize),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
