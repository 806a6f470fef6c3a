use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum NasgError {
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid vertex: {0}")]
    InvalidVertex(String),

    /// The point is not in the hull of the candidate vertices. `certificate`
    /// is a vector `y` over the equality rows (coordinates, then the
    /// convexity row) with `y·(v,1) <= 0` for every vertex and `y·(x,1) > 0`.
    #[error("point not in convex hull (infeasibility {infeasibility:.3e})")]
    NotInHull { infeasibility: f64, certificate: Vec<f64> },

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("oracle method not applicable: {0}")]
    OracleMismatch(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl NasgError {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            NasgError::Parse(_)
            | NasgError::InvalidInput(_)
            | NasgError::InvalidStrategy(_)
            | NasgError::Io(_) => 1,
            NasgError::Capacity(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, NasgError>;
