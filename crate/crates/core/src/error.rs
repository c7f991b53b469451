use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("matrix has non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix must be square, found {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix shape {rows}x{cols} does not match {len} entries")]
    BadShape { rows: usize, cols: usize, len: usize },
    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    EigenNoConvergence { iterations: usize },
    #[error("power convergence is indeterminate: eigenvalue {re}+{im}i lies in the unit-circle band near 1")]
    Indeterminate { re: f64, im: f64 },
    #[error("matrix powers do not converge")]
    NotPowerConvergent,
    #[error("family must contain at least one matrix")]
    EmptyFamily,
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("label index {index} out of range for a family of {size} matrices")]
    LabelIndex { index: usize, size: usize },
    #[error("subset must be nonempty")]
    EmptySubset,
    #[error("refusing to enumerate subsets of {labels} labels (limit {limit}); pass subsets explicitly")]
    TooManyLabels { labels: usize, limit: usize },
    #[error("subset is not transversal: dim N = {dim_n}, dim R = {dim_r}, dim(N+R) = {dim_sum}, ambient {ambient}")]
    NotTransversal { dim_n: usize, dim_r: usize, dim_sum: usize, ambient: usize },
    #[error("schedule keys must be strictly increasing (violation at entry {index})")]
    UnorderedKeys { index: usize },
    #[error("schedules interleave: every key of the first must precede every key of the second")]
    InterleavedKeys,
    #[error("key map is not monotone between entries {index} and {next}", next = index + 1)]
    NonMonotone { index: usize },
    #[error("insertion position {position} out of range for product of length {len}")]
    InvalidPosition { position: usize, len: usize },
    #[error("family is certified not CP ({property}); pass an override to run anyway")]
    Refused { property: String },
    #[error("no convergence within {levels} levels; last residual {last:e}")]
    NonConvergence { levels: usize, last: f64, residuals: Vec<f64> },
    #[error("partition must contain the endpoints of the schedule")]
    MissingEndpoint,
    #[error("partition key is not a schedule key")]
    ForeignKey,
    #[error("sample key lies below the minimal schedule key")]
    SampleBelowStart,
    #[error("driving function undefined at a partition key")]
    UndefinedSample,
    #[error("empty schedule has no endpoints")]
    EmptySchedule,
    #[error("spectral radius bounds [{lower}, {upper}] are within {margin} of 1; boundary instances are refused")]
    BoundaryCase { lower: f64, upper: f64, margin: f64 },
    #[error("invalid tolerance configuration: {0}")]
    BadTolerance(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
