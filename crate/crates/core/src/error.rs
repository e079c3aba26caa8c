use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("vertex {0} is not a member of the given set")]
    NotInSet(usize),

    #[error("tuple space of {n}^{k} = {tuples} exceeds the budget of {budget} tuples")]
    TupleBudget {
        n: usize,
        k: usize,
        tuples: u128,
        budget: u64,
    },

    #[error("duplicate vertex {0} in individualization sequence")]
    DuplicateVertex(usize),

    #[error("invalid rank decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("graph on {n} vertices exceeds the bound of {bound} for {what}")]
    SizeBound {
        what: &'static str,
        n: usize,
        bound: usize,
    },

    #[error("flip construction failed: {0}")]
    Flip(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("search budget exceeded: {0}")]
    Budget(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown side tag {0}")]
    UnknownSide(u8),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
