use thiserror::Error;

/// Errors raised across the toolkit.
///
/// The variants are grouped so that callers (the CLI in particular) can map
/// them onto a small set of exit codes: input problems, budget refusals and
/// structural corruption.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid terminal: {0}")]
    InvalidTerminal(String),

    #[error("network does not connect its terminals: {0}")]
    NotConnecting(String),

    #[error("operation not supported in this space: {0}")]
    UnsupportedMode(String),

    #[error(
        "enumeration refused: {vertices} vertices ({arcs} candidate arcs, ~2^{arcs} arc subsets) \
         exceeds the ceiling of {ceiling} vertices"
    )]
    BudgetExceeded {
        vertices: usize,
        arcs: usize,
        ceiling: usize,
    },

    #[error("instance too large for exhaustive search: {what} = {count}, limit {limit}")]
    TooLarge {
        what: &'static str,
        count: usize,
        limit: usize,
    },

    #[error("digraph is not strongly connected: {from} cannot reach {to}")]
    NotStronglyConnected { from: String, to: String },

    #[error("uncovered edge {from} -> {to}: network is not a pruned shortest-network candidate")]
    UncoveredEdge { from: usize, to: usize },

    #[error("structural corruption: {0}")]
    Corruption(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
