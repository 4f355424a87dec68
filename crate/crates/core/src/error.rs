use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("expected {what} of length {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("metric of `{manifold}` is not positive definite at {point:?} (smallest eigenvalue {smallest:e})")]
    NotPositiveDefinite {
        manifold: String,
        point: Vec<f64>,
        smallest: f64,
    },
    #[error("metric of `{manifold}` is singular at {point:?}")]
    SingularMetric { manifold: String, point: Vec<f64> },
    #[error("manifold `{0}` has no complex structure")]
    NoComplexStructure(String),
    #[error("rank mismatch at {point:?}: expected {expected}, found {found}")]
    RankMismatch {
        point: Vec<f64>,
        expected: usize,
        found: usize,
    },
    #[error("Gram-Schmidt breakdown while building the {frame} frame at {point:?}")]
    FrameBreakdown { frame: &'static str, point: Vec<f64> },
    #[error("vector is not horizontal (vertical part has norm {defect:e})")]
    NotHorizontal { defect: f64 },
    #[error("vector is not orthogonal to the range (range part has norm {defect:e})")]
    NotNormal { defect: f64 },
    #[error("map is not anti-invariant at {point:?} (vertical defect {defect:e})")]
    NotAntiInvariant { point: Vec<f64>, defect: f64 },
    #[error("need at least {needed} sample points, got {found}")]
    InsufficientSamples { needed: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
