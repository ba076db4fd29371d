use thiserror::Error;

/// Errors produced by the LP layer, the adjacency enumeration and the
/// training pipeline.
#[derive(Error, Debug)]
pub enum LpError {
    #[error("constraint matrix is rank deficient: rank {rank} < {rows} rows")]
    RankDeficient { rank: usize, rows: usize },

    #[error("basis matrix is singular (pivot {pivot:.3e} at column {col})")]
    SingularBasis { col: usize, pivot: f64 },

    #[error("problem is infeasible (phase-1 objective {phase1_obj:.3e})")]
    Infeasible { phase1_obj: f64 },

    #[error("problem is unbounded along entering column {entering}")]
    Unbounded { entering: usize },

    #[error("edge from vertex is unbounded (entering column {entering}); the feasible region must be bounded")]
    UnboundedEdge { entering: usize },

    #[error("pivot limit {limit} exceeded ({pivots} pivots, objective {objective:.6e})")]
    MaxPivotsExceeded {
        limit: usize,
        pivots: usize,
        objective: f64,
    },

    #[error("no transition basis found after exploring {bases_seen} bases of the vertex")]
    NoTransitionNode { bases_seen: usize },

    #[error("basis exploration cap {cap} exceeded while enumerating adjacent vertices")]
    ExplorationCapExceeded { cap: usize },

    #[error("branch-and-bound node limit {limit} exceeded (best incumbent objective: {incumbent:?})")]
    NodeLimitExceeded { limit: usize, incumbent: Option<f64> },

    #[error("combinatorial guard exceeded: {bases} bases > {guard}")]
    TooManyBases { bases: u128, guard: u128 },

    #[error("shape mismatch: {context} (expected {expected}, got {got})")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("adjacent-vertex set is empty; a vertex of a bounded polytope has at least one neighbor")]
    EmptyAdjacency,

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("leaving-variable selection contract violated: {0}")]
    PivotContract(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, LpError>;
