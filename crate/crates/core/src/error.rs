use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph is empty after preprocessing")]
    EmptyGraph,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph is disconnected; keep only the largest connected component (load with preprocessing)")]
    Disconnected,

    #[error("node {node} out of range (node count {node_count})")]
    InvalidNode { node: u64, node_count: usize },

    #[error("supernode {0} is not live")]
    DeadSupernode(u32),

    #[error("self-pair ({0}, {0}) carries no weight")]
    SelfPair(u32),

    #[error("budget of {budget_bits:.4} bits is infeasible: membership alone needs {residual_bits:.4} bits")]
    BudgetInfeasible { budget_bits: f64, residual_bits: f64 },

    #[error("machine {machine}: {source}")]
    Machine {
        machine: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("refusing {what} on {size} nodes (limit {limit}); pass the override to force")]
    SizeGuard {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("correlation undefined for a constant vector")]
    UndefinedCorrelation,

    #[error("invalid summary: {0}")]
    InvalidSummary(String),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
