//! Error and warning types shared across the crate.
//!
//! Hard failures (shape mismatches, parse errors, invalid configuration) are
//! `Error`s. Recoverable numerical conditions (rank deficiency, near-singular
//! pencils, non-convergence) are `Warning`s attached to otherwise valid
//! results, so callers can decide how strict to be.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        context: &'static str,
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {context} at ({row}, {col})")]
    NonFinite {
        context: &'static str,
        row: usize,
        col: usize,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported attribute type for '{name}': {declared}")]
    UnknownAttributeType { name: String, declared: String },

    #[error("missing value at line {line} for attribute '{name}'")]
    MissingValue { line: usize, name: String },

    #[error("too few training instances: {n} (ML-KNN needs more than {k_neighbors})")]
    TooFewInstances { n: usize, k_neighbors: usize },

    #[error("feature subset too small for redundancy score: {0} < 2")]
    SubsetTooSmall(usize),

    #[error("expected {expected} (hamming loss, ranking loss) pairs, got {actual}")]
    WrongLength { expected: usize, actual: usize },

    #[error("degenerate rank table: Iman-Davenport statistic is undefined")]
    DegenerateRanks,

    #[error("dataset has no train/test split and none was configured")]
    SplitMissing,

    #[error("incompatible reports: {0}")]
    IncompatibleReports(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("failed to serialize: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Advisory condition raised by a numerical routine that still produced a
/// usable result.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// A singular value fell below 1e-12 of the largest; the orthonormal
    /// factor was completed deterministically.
    RankDeficient,
    /// Some eigenvalue pair of a Sylvester pencil summed below 1e-10; the
    /// solve proceeded with regularization.
    NearSingularPencil,
    /// Duplicate instances made k-nearest-neighbor sets ambiguous; ties were
    /// broken by lower index.
    DegenerateInstances { pairs: usize },
    /// A feature with zero centered norm was assigned a zero redundancy row.
    ConstantFeature { feature: usize },
    /// A label column with no positive instances.
    EmptyLabel { label: usize },
    /// The GPI inner loop stopped improving before its iteration cap.
    GpiStall,
    /// The ALM loop hit its iteration cap with feasibility residual above
    /// tolerance; the clipped and renormalized iterate was returned.
    AlmNoConverge { residual: f64 },
    /// The outer alternating loop hit its iteration cap.
    NotConverged { iterations: usize },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::RankDeficient => write!(f, "rank-deficient input to polar factor"),
            Warning::NearSingularPencil => write!(f, "near-singular Sylvester pencil"),
            Warning::DegenerateInstances { pairs } => {
                write!(f, "{pairs} duplicate instance pair(s) in neighbor graph")
            }
            Warning::ConstantFeature { feature } => {
                write!(f, "constant feature {feature} excluded from redundancy")
            }
            Warning::EmptyLabel { label } => write!(f, "label {label} has no positive instances"),
            Warning::GpiStall => write!(f, "GPI inner loop stalled"),
            Warning::AlmNoConverge { residual } => {
                write!(f, "ALM did not converge (residual {residual:.3e})")
            }
            Warning::NotConverged { iterations } => {
                write!(f, "outer loop hit iteration cap ({iterations})")
            }
        }
    }
}
