//! Dense complex linear algebra used by every other module.

mod eig;
mod logc;
mod matrix;
mod ode;
mod poly;
pub mod special;
mod steady;

pub use eig::{eig_general, eig_similarity_hn, eigenvalues, schur, ScaledVectors, Spectrum};
pub use logc::LogComplex;
pub use matrix::{CMatrix, C64};
pub use ode::{
    integrate_linear_ode, rk4_step, step_size, Banded, OdeMode, Rk4Grid, MAX_STEP, NORM_OVERFLOW,
};
pub use poly::{poly_eval, poly_roots, PolyRoots};
pub use steady::{
    lyapunov_residual, solve_steady_lyapunov, solve_steady_sylvester, CovarianceLayout,
    COVARIANCE_LAYOUT, DENSE_LYAPUNOV_LIMIT,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix dimension {0} exceeds the supported maximum")]
    TooLarge(usize),
    #[error("QR iteration did not converge")]
    NonConvergence,
    #[error("eigenvalues {0} and {1} are numerically degenerate")]
    DegenerateSpectrum(C64, C64),
    #[error("eigenvector basis is too ill-conditioned (biorthogonality residual {0:e})")]
    IllConditioned(f64),
    #[error("matrix is not tridiagonal with uniform diagonal")]
    NotTridiagonal,
    #[error("localization length must be finite and positive, got {0}")]
    InvalidLocalizationLength(f64),
    #[error("exponential scale factors are not representable; use the log-scaled vectors")]
    ScaleOverflow,
    #[error("leading polynomial coefficient vanishes")]
    DegenerateLeadingCoefficient,
    #[error("polynomial degree must be at least 1")]
    ConstantPolynomial,
    #[error("state norm exceeded 1e300 at t = {0}")]
    StepOverflow(f64),
    #[error("time grid must start at 0 and be strictly increasing")]
    NonMonotonicGrid,
    #[error("step-halving check failed: relative difference {0:e}")]
    RichardsonMismatch(f64),
    #[error("dynamical matrix has an eigenvalue with Im E = {0:e} >= -1e-12")]
    UnstableModel(f64),
    #[error("linear system is singular")]
    Singular,
}

impl LinalgError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::NonFinite => "NonFinite",
            Self::DimensionMismatch(_) => "DimensionMismatch",
            Self::NotSquare { .. } => "NotSquare",
            Self::TooLarge(_) => "TooLarge",
            Self::NonConvergence => "NonConvergence",
            Self::DegenerateSpectrum(..) => "DegenerateSpectrum",
            Self::IllConditioned(_) => "IllConditioned",
            Self::NotTridiagonal => "NotTridiagonal",
            Self::InvalidLocalizationLength(_) => "InvalidLocalizationLength",
            Self::ScaleOverflow => "ScaleOverflow",
            Self::DegenerateLeadingCoefficient => "DegenerateLeadingCoefficient",
            Self::ConstantPolynomial => "ConstantPolynomial",
            Self::StepOverflow(_) => "StepOverflow",
            Self::NonMonotonicGrid => "NonMonotonicGrid",
            Self::RichardsonMismatch(_) => "RichardsonMismatch",
            Self::UnstableModel(_) => "UnstableModel",
            Self::Singular => "Singular",
        }
    }
}
