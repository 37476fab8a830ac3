use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Requested minimum degree exceeds the number of available source entities.
    #[error("infeasible degree floor: x_min = {x_min} exceeds source count {n_v}")]
    InfeasibleDegree { x_min: f64, n_v: u32 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed edge line: {reason}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    /// The request budget is spent; callers treat this as a normal stop signal.
    #[error("request budget exhausted")]
    BudgetExhausted,

    /// The addressed entity is dead (deleted/suspended); the request failed.
    #[error("entity {0} is dead")]
    DeadEntity(u32),

    #[error("no alive entities to sample")]
    NoAliveEntities,

    /// Walk and crawl strategies need a directed graph (entity IDs shared by
    /// both sides); a genuinely bipartite graph has no such view.
    #[error("operation requires a directed graph; this graph is bipartite ({n_v} x {n_w})")]
    NotDirected { n_v: u32, n_w: u32 },

    /// The candidate-list bound is undefined unless k < n2.
    #[error("bound undefined: k = {k} must be smaller than n2 = {n2}")]
    UndefinedBound { k: usize, n2: usize },

    #[error("experiment spec invalid: {0}")]
    SpecValidation(String),

    #[error("{0}")]
    OutOfRange(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
