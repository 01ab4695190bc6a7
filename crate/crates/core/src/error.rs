use crate::graph::EdgeId;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0} is not allowed")]
    SelfLoop(usize),
    #[error("edge weight {weight} outside the admissible range [{min}, {max}]")]
    WeightOutOfRange { weight: f64, min: f64, max: f64 },
    #[error("unknown or deleted edge {0:?}")]
    UnknownEdge(EdgeId),
    #[error("no edge between {0} and {1}")]
    NoSuchEdge(usize, usize),
    #[error("vertex {0} has no incident edges")]
    IsolatedVertex(usize),
    #[error("vertices {0} and {1} lie in different components")]
    Disconnected(usize, usize),
    #[error("demand vector is not in the range of the Laplacian (component imbalance {0:e})")]
    NotInRange(f64),
    #[error("elimination block is numerically singular")]
    SingularBlock,
    #[error("solver stopped after {iterations} iterations at relative residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("operation budget of {0} exhausted since the last build; rebuild required")]
    NeedsRebuild(usize),
    #[error("cover bound {bound} too small: exit probability only {probability}")]
    CoverBound { bound: u64, probability: f64 },
    #[error("visited set has no boundary weight")]
    NoBoundary,
    #[error("bucket precision exhausted: j = {j} exceeds the maximum {max}")]
    PrecisionExhausted { j: u32, max: u32 },
    #[error("vertex {u} cannot reach {v} in exactly {len} steps")]
    Unreachable { u: usize, v: usize, len: u64 },
    #[error("degree bound {bound} exceeded at vertex {vertex}")]
    DegreeBound { vertex: usize, bound: usize },
    #[error("demand change at {0} and {1} does not preserve the total demand")]
    RangeViolation(usize, usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
