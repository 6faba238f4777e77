use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::dynamics::DynamicsError;
use crate::models::ModelError;
use crate::ndlinalg::LinalgError;
use crate::oracle::OracleError;
use crate::propagator::PropagatorError;

/// Crate-wide error; `name()` is the variant name recorded in run sidecars.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Propagator(#[from] PropagatorError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Linalg(e) => e.name(),
            Self::Model(e) => e.name(),
            Self::Propagator(e) => e.name(),
            Self::Dynamics(e) => e.name(),
            Self::Analysis(e) => e.name(),
            Self::Oracle(e) => e.name(),
        }
    }
}
