use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected: no path between vertex {0} and vertex {1}")]
    Disconnected(usize, usize),

    #[error("edge ({u}, {v}) has nonpositive or non-finite cost {cost}")]
    BadEdgeCost { u: usize, v: usize, cost: f64 },

    #[error("vertex id {vertex} out of range for a graph with {len} vertices")]
    VertexOutOfRange { vertex: usize, len: usize },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sensing function evaluated at negative distance {0}")]
    NegativeDistance(f64),

    #[error("point ({x}, {y}) is not in free space")]
    NotInFreeSpace { x: f64, y: f64 },

    #[error("no free path between ({0}, {1}) and ({2}, {3})")]
    Unreachable(f64, f64, f64, f64),

    #[error("discretization disconnects the free space ({0}); try a smaller cell size")]
    DisconnectedDiscretization(String),

    #[error("robot configuration is empty")]
    EmptyConfiguration,

    #[error("brute-force guard exceeded: C({n}, {m}) = {count} > {limit}")]
    GuardExceeded { n: usize, m: usize, count: f64, limit: f64 },

    #[error("swap size mismatch: {robots} robots out, {vertices} vertices in")]
    SwapSizeMismatch { robots: usize, vertices: usize },

    #[error("vertex {vertex} is not in the partition of robot {robot}")]
    NotInPartition { robot: usize, vertex: usize },

    #[error("robot {robot} is not a neighbour of robot {other}")]
    NotNeighbor { robot: usize, other: usize },

    #[error("robot {0} has no neighbours; its partition cannot be re-served locally")]
    Isolated(usize),

    #[error("protocol did not converge within {limit} accepted moves")]
    MoveLimit { limit: usize },

    #[error("scenario field `{field}`: {msg}")]
    Scenario { field: String, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn scenario(field: &str, msg: impl Into<String>) -> Self {
        Error::Scenario {
            field: field.to_string(),
            msg: msg.into(),
        }
    }
}
