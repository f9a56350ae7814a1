use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("line {line}: self-loop at vertex {v}")]
    SelfLoop { line: usize, v: usize },
    #[error("io error: {0}")]
    Io(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("regime violation: {0} (pass override to force)")]
    Regime(String),
    #[error("recursion budget of {limit} frames exceeded")]
    RecursionBudget { limit: u64 },
    #[error("automaton level cap of {cap} exceeded")]
    LevelCap { cap: u64 },
    #[error("binomial query n={n} exceeds oracle capacity {capacity}")]
    Capacity { n: u64, capacity: u64 },
    #[error("brute force needs {states} states, above the guard of 2^26")]
    TooLarge { states: f64 },
    #[error("explored SAW region exceeds {nodes} nodes")]
    TreeTooLarge { nodes: usize },
    #[error("infeasible pinning")]
    Infeasible,
    #[error("boundary is not an antichain")]
    NotAntichain,
    #[error("root finding did not converge for d={d}")]
    NoConvergence { d: usize },
    #[error("estimator returned zero at coordinate {0}")]
    ZeroEstimate(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
