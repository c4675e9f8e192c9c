//! Error type shared by every stage of the pipeline.

use std::path::PathBuf;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Inconsistent parameters (bad `m`, `K`, `M`, ratio, ...).
    Config,
    /// Input data that cannot be read or has the wrong shape.
    Data,
    /// A numerical stage failed on otherwise valid input.
    Numeric,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid number of regions m = {m}: must satisfy {lo} <= m <= {hi}")]
    InvalidM { m: usize, lo: usize, hi: usize },

    #[error("invalid transform factor M = {0}: must be > 1")]
    InvalidFactor(f64),

    #[error("cluster count K = {k} is infeasible for {m} regions")]
    KFeasibility { k: usize, m: usize },

    #[error("centroids {k} and {l} coincide")]
    CoincidentCentroids { k: usize, l: usize },

    #[error("region {0} has zero degree in the affinity graph")]
    IsolatedRegion(usize),

    #[error("eigensolver did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("radius ratio {0} is outside (0, 1)")]
    InvalidRatio(f64),

    #[error("label vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("region index {index} out of range for {len} regions")]
    Index { index: usize, len: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: parse error at line {line}: {msg}")]
    Parse { path: PathBuf, line: u64, msg: String },

    #[error("{path}: ragged rows at line {line}: expected {expected} fields, found {found}")]
    RaggedRows { path: PathBuf, line: u64, expected: usize, found: usize },

    #[error("{path}: non-numeric cell {cell:?} at line {line}, column {col}")]
    NonNumericCell { path: PathBuf, line: u64, col: usize, cell: String },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("model document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{stage}: {source}")]
    Stage { stage: &'static str, source: Box<Error> },
}

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// The innermost error, with stage context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self.root() {
            Error::InvalidM { .. }
            | Error::InvalidFactor(_)
            | Error::KFeasibility { .. }
            | Error::InvalidRatio(_)
            | Error::Config(_) => ErrorClass::Config,
            Error::EmptyInput
            | Error::Dimension(_)
            | Error::LengthMismatch(..)
            | Error::Index { .. }
            | Error::NonFinite { .. }
            | Error::Parse { .. }
            | Error::RaggedRows { .. }
            | Error::NonNumericCell { .. }
            | Error::Io { .. }
            | Error::Json(_) => ErrorClass::Data,
            Error::CoincidentCentroids { .. } | Error::IsolatedRegion(_) | Error::NonConvergence { .. } => {
                ErrorClass::Numeric
            }
            Error::Stage { .. } => unreachable!("root() strips stage context"),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
