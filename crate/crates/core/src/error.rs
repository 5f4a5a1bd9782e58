use thiserror::Error;

/// Errors produced while building or solving a problem.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("unknown example `{name}` (valid: {valid})")]
    UnknownExample { name: String, valid: String },

    #[error("invalid mesh size N={0}: must be at least 16 and divisible by 8")]
    InvalidMeshSize(usize),

    #[error("invalid time grid: T={final_time}, M={steps}")]
    InvalidTimeGrid { final_time: f64, steps: usize },

    #[error("degenerate mesh segment {segment}: length {length:e}")]
    DegenerateSegment { segment: usize, length: f64 },

    #[error("coefficient evaluated at the discontinuity x={0}; request a one-sided limit")]
    AtDiscontinuity(f64),

    #[error("degenerate pivot in discontinuity row: denominator {denominator:e}")]
    DegeneratePivot { denominator: f64 },

    #[error("tridiagonal pivot breakdown at row {row}: pivot {pivot:e}")]
    PivotBreakdown { row: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("node {index}: {source}")]
    AtNode {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("time level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
