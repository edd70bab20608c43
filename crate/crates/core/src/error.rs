//! Errors returned by this crate.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors returned by this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A constructor or operation received an out-of-range parameter.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    /// Two sequences or tensors that must agree in length/shape do not.
    #[error("dimension mismatch for `{what}`: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// A value that must be finite is NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    /// An operation requires a non-empty input.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    /// The input series is too short for the requested operation.
    #[error("series too short: need at least {needed} samples, got {got}")]
    SeriesTooShort { needed: usize, got: usize },
    /// A series still contains missing values where a complete one is required.
    #[error("missing value at index {index} in {what}; impute first")]
    MissingValue { what: &'static str, index: usize },
    /// Per-site min equals max; the affine normalizer is undefined.
    #[error("degenerate range for site `{site}`: min == max")]
    DegenerateRange { site: String },
    /// The CPK denominator for a row is (numerically) zero.
    #[error("degenerate CPK row {row}: correlation sum within 1e-9 of zero")]
    DegenerateCpkRow { row: usize },
    /// A gap starts too early for the requested autoregressive order.
    #[error("gap at index {index} starts before {order} valid samples are available")]
    GapTooEarly { index: usize, order: usize },
    /// Cluster-based imputation found a neighbor missing at the same timestamp.
    #[error("neighbor site `{site}` is also missing at index {index}")]
    NeighborMissing { site: String, index: usize },
    /// A site id was not found in the cluster.
    #[error("unknown site `{0}`")]
    UnknownSite(String),
    /// Backpropagation was requested without recorded forward traces.
    #[error("no forward traces recorded: run the forward pass with recording enabled")]
    MissingTraces,
    /// Training produced a non-finite loss.
    #[error("training diverged: non-finite loss at epoch {epoch}")]
    Diverged { epoch: usize },
    /// The ensemble needs more neighbor sites than the cluster provides.
    #[error("insufficient neighbors: {requested} slices need {} neighbors, cluster has {available}", .requested - 1)]
    InsufficientNeighbors { requested: usize, available: usize },
    /// A residual dataset was requested past the trained prefix of the chain.
    #[error("slice {slice} has no trained predecessor; train slices in order")]
    UntrainedPredecessor { slice: usize },
    /// Promotion percentage is undefined for a zero reference metric.
    #[error("promotion undefined: reference metric is zero")]
    ZeroReferenceMetric,
}
