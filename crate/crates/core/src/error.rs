use num_complex::Complex64;
use thiserror::Error;

use crate::schurhorn::FarkasCertificate;

/// Failure modes shared by every module.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not normal: commutator residual {residual:e} exceeds tolerance {tol:e}")]
    NotNormal { residual: f64, tol: f64 },

    #[error("barycentric coordinates requested for a degenerate (collinear) triple")]
    DegenerateHull,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("infeasible input: {0}")]
    InfeasibleInput(String),

    #[error("tolerance unreachable: {0}")]
    ToleranceUnreachable(String),

    #[error("model too coarse: {0}")]
    ModelTooCoarse(String),

    #[error("linear feasibility problem is infeasible")]
    Infeasible(Box<FarkasCertificate>),

    #[error("necessity violated at entry {index}: {point} lies {distance:e} from the hull")]
    NecessityViolated {
        index: usize,
        point: Complex64,
        distance: f64,
    },
}

impl Error {
    /// Short machine-readable tag for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotNormal { .. } => "NotNormal",
            Error::DegenerateHull => "DegenerateHull",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidInput(_) => "InvalidInput",
            Error::InfeasibleInput(_) => "InfeasibleInput",
            Error::ToleranceUnreachable(_) => "ToleranceUnreachable",
            Error::ModelTooCoarse(_) => "ModelTooCoarse",
            Error::Infeasible(_) => "Infeasible",
            Error::NecessityViolated { .. } => "NecessityViolated",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
