use thiserror::Error;

use crate::network::VertexId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("edge list is empty")]
    EmptyEdgeList,
    #[error("graph is disconnected: {reached} of {total} vertices reachable from the origin")]
    DisconnectedGraph { reached: usize, total: usize },
    #[error("edge ({u}, {v}) has non-positive or non-finite conductance {conductance}")]
    NonpositiveConductance {
        u: VertexId,
        v: VertexId,
        conductance: f64,
    },
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("no vertex carries the label {0:?}")]
    UnknownLabel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("origin is not part of the kept vertex set")]
    OriginOutsideKeep,
    #[error("network has {n} vertices; exact expansion is capped at {cap}")]
    TooLargeForExact { n: usize, cap: usize },
    #[error("vector length {found} does not match vertex count {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("network has no ground vertex")]
    MissingGround,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("function is nonzero at the ground vertex")]
    SupportTouchesGround,
    #[error("vertices must be distinct")]
    SameVertex,
    #[error("conjugate gradient hit {iterations} iterations with relative residual {rel_residual:e}")]
    MaxIterExceeded {
        iterations: usize,
        rel_residual: f64,
        best: Vec<f64>,
    },
    #[error("operator is not positive definite (curvature {curvature:e})")]
    NotSpd { curvature: f64 },
    #[error("dimension {n} exceeds the cap {cap}")]
    DimensionCap { n: usize, cap: usize },
    #[error("vertex {0:?} lies outside the truncation")]
    VertexOutsideTruncation(String),
    #[error("monotonicity violated: {0}")]
    MonotonicityViolated(String),
    #[error("spectral gap must be positive, got {0}")]
    NonpositiveGap(f64),
    #[error("Z^{0} is recurrent: no finite-energy monopole exists for d <= 2")]
    RecurrentLattice(usize),
    #[error("quadrature did not converge: last two levels differ by {difference:e} (tolerance {tolerance:e})")]
    UnconvergedQuadrature { difference: f64, tolerance: f64 },
    #[error("quadrature grid {grid}^{dim} exceeds the point budget")]
    GridTooLarge { grid: usize, dim: usize },
    #[error("vertex {0} has no neighbours")]
    IsolatedVertex(VertexId),
    #[error("malformed network file: {0}")]
    Format(String),
}
