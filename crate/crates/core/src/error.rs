use thiserror::Error;

/// Everything that can go wrong while building an instance or running a solve.
///
/// The variants split into two families. Input problems (bad matrices, bad
/// parameters, dimension mismatches) are the caller's fault and are reported
/// by [`Error::is_internal`] as `false`. The remaining variants signal that a
/// solver invariant broke; they should never fire on valid input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix has no positive entries")]
    AllZero,
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("entry at ({row}, {col}) is not a finite number")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("entry ({row}, {col}) is outside a {rows}x{cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("MatrixMarket line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("{kind} {index} has no nonzero entries")]
    EmptyRowOrColumn { kind: LineKind, index: usize },
    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyDimensions { rows: usize, cols: usize },
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("coordinate {index} is {value}; must be positive")]
    NonPositiveCoordinate { index: usize, value: f64 },
    #[error("coordinate {index} is {value}; must be nonnegative")]
    NegativeCoordinate { index: usize, value: f64 },
    #[error("{0}")]
    DomainError(String),
    #[error("alpha must be a finite number >= 0, got {0}")]
    InvalidAlpha(f64),
    #[error("beta must be a finite number, got {0}")]
    InvalidBeta(f64),
    #[error("epsilon {epsilon} outside (0, {bound}]: {reason}")]
    EpsilonOutOfRange {
        epsilon: f64,
        bound: f64,
        reason: String,
    },
    #[error("scaled gradient {0} is below -1")]
    TruncationDomainViolation(f64),
    #[error("iteration {iteration}: constraint {row} has load {load} > 1")]
    FeasibilityViolation {
        iteration: u64,
        row: usize,
        load: f64,
    },
    #[error("dual vector leaves column {0} uncovered; gap undefined")]
    DualDomainError(usize),
    #[error("pre-scale covering certificate {min_load} < required {required}")]
    CertificateShortfall { min_load: f64, required: f64 },
    #[error("round {round}: agent {agent} is missing the load of constraint {row}")]
    MissingLoad {
        round: u64,
        agent: usize,
        row: usize,
    },
    #[error("agent {agent} read entry ({row}, {col}) outside its column")]
    LocalityViolation {
        agent: usize,
        row: usize,
        col: usize,
    },
    #[error("oracle did not converge: {0}")]
    NonConvergence(String),
    #[error("oracle does not support this instance structure: {0}")]
    UnsupportedStructure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    Row,
    Column,
}

impl std::fmt::Display for LineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LineKind::Row => f.write_str("row"),
            LineKind::Column => f.write_str("column"),
        }
    }
}

impl Error {
    /// True for errors that indicate a broken solver invariant rather than
    /// bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::TruncationDomainViolation(_)
                | Error::FeasibilityViolation { .. }
                | Error::CertificateShortfall { .. }
                | Error::LocalityViolation { .. }
                | Error::MissingLoad { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
