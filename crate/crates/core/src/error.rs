use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Domain errors. Every variant knows which module raised it and, where it
/// applies, the residual that triggered it.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid map: {reason}")]
    InvalidMap { reason: String, residual: Option<f64> },

    #[error("coefficient matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("form is not divisible by 1 - |z|^2 (residual {residual:.3e})")]
    NotDivisible { residual: f64 },

    #[error("mixed-term matrix is not positive semidefinite (least eigenvalue {min_eig:.3e})")]
    NotPositive { min_eig: f64 },

    #[error("point lies outside the open unit ball (norm {norm})")]
    OutsideBall { norm: f64 },

    #[error("degree one map: the exhaustion function is constant")]
    DegenerateDegreeOne,

    #[error("critical point search did not converge after {iterations} iterations (gradient norm {grad_norm:.3e})")]
    NoConvergence { iterations: usize, grad_norm: f64 },

    #[error("matrix is not symmetric (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },

    #[error("embedding dimension is not maximal: signature ({pos}, {neg}, {zero}) but expected (1, {expected}, 0)")]
    NotMaximalEmbedding {
        pos: usize,
        neg: usize,
        zero: usize,
        expected: usize,
    },

    #[error("factorization failed: {reason} (residual {residual:.3e})")]
    FactorizationFailure { reason: String, residual: f64 },

    #[error("construction infeasible (least eigenvalue {min_eig:.3e})")]
    Infeasible { min_eig: f64 },
}

impl Error {
    /// Module the error originated from.
    pub fn module(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. }
            | Error::InvalidMap { .. }
            | Error::NotHermitian { .. }
            | Error::NotDivisible { .. }
            | Error::NotPositive { .. } => "core-poly",
            Error::OutsideBall { .. } => "automorphisms",
            Error::DegenerateDegreeOne | Error::NoConvergence { .. } => "lambda",
            Error::NotSymmetric { .. } => "normal-form",
            Error::NotMaximalEmbedding { .. } | Error::FactorizationFailure { .. } => "polyclass",
            Error::Infeasible { .. } => "existence",
        }
    }

    pub fn residual(&self) -> Option<f64> {
        match self {
            Error::InvalidMap { residual, .. } => *residual,
            Error::NotHermitian { residual }
            | Error::NotDivisible { residual }
            | Error::NotSymmetric { residual }
            | Error::FactorizationFailure { residual, .. } => Some(*residual),
            Error::NotPositive { min_eig } | Error::Infeasible { min_eig } => Some(*min_eig),
            Error::OutsideBall { norm } => Some(*norm),
            Error::NoConvergence { grad_norm, .. } => Some(*grad_norm),
            Error::DimensionMismatch { .. } | Error::DegenerateDegreeOne | Error::NotMaximalEmbedding { .. } => None,
        }
    }

    /// Short machine-readable name, used by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidMap { .. } => "InvalidMap",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NotDivisible { .. } => "NotDivisible",
            Error::NotPositive { .. } => "NotPositive",
            Error::OutsideBall { .. } => "OutsideBall",
            Error::DegenerateDegreeOne => "DegenerateDegreeOne",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::NotMaximalEmbedding { .. } => "NotMaximalEmbedding",
            Error::FactorizationFailure { .. } => "FactorizationFailure",
            Error::Infeasible { .. } => "Infeasible",
        }
    }

    pub(crate) fn invalid(reason: impl Into<String>) -> Self {
        Error::InvalidMap {
            reason: reason.into(),
            residual: None,
        }
    }
}
