use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid antenna configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid DoF tuple: {0}")]
    InvalidTuple(String),

    #[error("degenerate objective: at least one weight must be positive")]
    DegenerateObjective,

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("outside the DoF region: violates {0}")]
    NotInRegion(String),

    #[error("plan feasibility violated: {0}")]
    PlanInfeasible(String),

    #[error("relay dimension exceeds antennas: requested {requested}, available {available}")]
    RelayDimension { requested: usize, available: usize },

    #[error("alignment infeasible at runtime: {0}")]
    AlignmentInfeasible(String),

    #[error("rank condition failed: {0}")]
    RankCondition(String),

    #[error("B-matrix rank deficient: numerical rank {rank} of {size}")]
    RelayMacSingular { rank: usize, size: usize },

    #[error("BC zero-forcing stack rank deficient: numerical rank {rank} of {size}")]
    RelayBcSingular { rank: usize, size: usize },

    #[error("degenerate noise model: {0}")]
    DegenerateNoise(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("malformed matrix container: {0}")]
    Container(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
