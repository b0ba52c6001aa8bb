//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building models, evaluating closed
/// forms, simulating, or analyzing graphs.
#[derive(Debug, Error)]
pub enum Error {
    /// The declared edge set admits no topological order.
    #[error("cyclic graph: nodes {0:?} lie on a directed cycle")]
    CyclicGraph(Vec<String>),

    /// A node name was referenced but never declared.
    #[error("unknown node: {0}")]
    UnknownNode(String),

    /// Node names must be unique.
    #[error("duplicate node: {0}")]
    DuplicateNode(String),

    /// At most one edge per ordered pair.
    #[error("duplicate edge: {0} -> {1}")]
    DuplicateEdge(String, String),

    /// Standardization would require a negative residual variance.
    #[error(
        "infeasible standardization at node {node}: parent combination has \
         variance {parent_variance:.6}, exceeding 1 by {deficit:.6}"
    )]
    InfeasibleStandardization {
        node: String,
        parent_variance: f64,
        deficit: f64,
    },

    /// A model cannot be sampled from (propagated construction failure).
    #[error("infeasible model: {0}")]
    InfeasibleModel(String),

    /// Conditioning/design matrix is numerically singular.
    #[error("singular design: {0}")]
    SingularDesign(String),

    /// The instrument-to-treatment coefficient leaves no residual variance,
    /// |c3| >= 1.
    #[error("degenerate instrument: |c3| = {0} >= 1")]
    DegenerateInstrument(f64),

    /// Selection-model denominator vanishes, (beta1 + c0*beta2)^2 >= 1.
    #[error("degenerate selection: (beta1 + c0*beta2)^2 = {0} >= 1")]
    DegenerateSelection(f64),

    /// A function was evaluated outside its domain.
    #[error("domain error: {0}")]
    DomainError(String),

    /// Variance arguments must be positive where the formula divides by them.
    #[error("nonpositive variance: {0}")]
    NonpositiveVariance(String),

    /// A dataset column was referenced but does not exist.
    #[error("unknown column: {0}")]
    UnknownColumn(String),

    /// Band conditioning removed every row.
    #[error("empty selection: no rows within half-width {half_width} of {center} on {column}")]
    EmptySelection {
        column: String,
        center: f64,
        half_width: f64,
    },

    /// Too few rows for the requested analysis.
    #[error("insufficient data: {got} rows, need at least {need}")]
    InsufficientData { got: usize, need: usize },

    /// Path enumeration refused: the graph is too large to enumerate
    /// exhaustively, the report would be truncated.
    #[error("path explosion: graph has {nodes} nodes, enumeration limit is {limit}")]
    PathExplosion { nodes: usize, limit: usize },

    /// The declared instrument has an open channel to the outcome that
    /// bypasses the treatment.
    #[error("not an instrument: {0}")]
    NotAnInstrument(String),

    /// Malformed model file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Malformed CSV input.
    #[error("csv error at line {line}: {message}")]
    Csv { line: usize, message: String },

    /// Invalid configuration value.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Query refers to nodes in an inconsistent way (a == b, overlap with
    /// the conditioning set, and the like).
    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
