//! Relaxation dynamics of dissipative non-Hermitian tight-binding chains.
//!
//! The crate is organised bottom-up:
//!
//! * [`ndlinalg`] dense complex linear algebra (Schur, biorthogonal spectra,
//!   polynomial roots, RK4 integration, steady-state Lyapunov solves, special functions);
//! * [`models`] Hatano-Nelson, non-Hermitian SSH and next-nearest-neighbour chains;
//! * [`propagator`] single-particle propagators by several independent routes;
//! * [`dynamics`] covariance-matrix evolution and relaxation-time extraction;
//! * [`analysis`] scaling fits, interference dumps and localization-length extraction;
//! * [`oracle`] exact Fock-space Lindblad evolution for tiny fermionic chains;
//! * [`cli`] run configuration, sweeps and CSV/JSON artifacts;
//! * [`figs`] table schemas consumed by the plotting layer.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod figs;
pub mod models;
pub mod ndlinalg;
pub mod oracle;
pub mod propagator;

pub use error::Error;
pub use models::{ModelKind, ModelSpec, Statistics};
pub use ndlinalg::{CMatrix, Spectrum, C64};
