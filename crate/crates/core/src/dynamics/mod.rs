//! Covariance dynamics `dC/dt = A C + C A† + 2 Gamma I` with `A = -i H_eff`, steady states,
//! initial conditions and relaxation-time extraction.
//!
//! `C[m][n] = <c_n† c_m>` (see [`COVARIANCE_LAYOUT`]), so `C[m][m]` is the occupation of site `m`.

mod relax;

pub use relax::{
    relax, relaxation_time, steady_diagonal_quadrature, steady_occupation_quadrature, vacuum_occupation_fast,
    CrossingInfo, RelaxConfig, RelaxRun, RelaxationResult, RelaxationTracker, BOSON_UNIFORM_GAMMA_CAP,
    DEFAULT_GRID_FACTOR, DEFAULT_HORIZON_FACTOR, DEFAULT_SUSTAIN_FACTOR,
};

use nalgebra::linalg::SymmetricEigen;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{ModelError, ModelSpec, Statistics};
use crate::ndlinalg::special::gauss_legendre;
use crate::ndlinalg::{
    integrate_linear_ode, solve_steady_sylvester, step_size, Banded, CMatrix, LinalgError, OdeMode, Rk4Grid, C64,
    COVARIANCE_LAYOUT,
};

pub use crate::ndlinalg::CovarianceLayout;

/// Layout of every covariance matrix produced by this module.
pub const LAYOUT: CovarianceLayout = COVARIANCE_LAYOUT;
pub const PAULI_TOL: f64 = 1e-8;
pub const HERMITICITY_TOL: f64 = 1e-9;
pub const FORMAL_SOLUTION_TOL: f64 = 1e-7;
const GL_POINTS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("all-filled initial state is undefined for bosons")]
    AllFilledBosons,
    #[error("covariance eigenvalue {0:e} violates the statistics bound")]
    PauliViolation(f64),
    #[error("covariance lost hermiticity (defect {0:e})")]
    NotHermitian(f64),
    #[error("formal solution disagrees with the ODE route by {0:e}")]
    FormalSolutionMismatch(f64),
    #[error("steady-state occupation is zero")]
    ZeroSteadyState,
    #[error("no sustained crossing before the horizon t = {0}")]
    NotRelaxedWithinHorizon(f64),
    #[error("invalid relaxation input: {0}")]
    InvalidCurve(String),
    #[error("site {0} outside 1..={1}")]
    InvalidSite(usize, usize),
    #[error("steady-state quadrature did not converge by t = {0}")]
    SteadyStateNotConverged(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl DynamicsError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::AllFilledBosons => "AllFilledBosons",
            Self::PauliViolation(_) => "PauliViolation",
            Self::NotHermitian(_) => "NotHermitian",
            Self::FormalSolutionMismatch(_) => "FormalSolutionMismatch",
            Self::ZeroSteadyState => "ZeroSteadyState",
            Self::NotRelaxedWithinHorizon(_) => "NotRelaxedWithinHorizon",
            Self::InvalidCurve(_) => "InvalidCurve",
            Self::InvalidSite(..) => "InvalidSite",
            Self::SteadyStateNotConverged(_) => "SteadyStateNotConverged",
            Self::Model(e) => e.name(),
            Self::Linalg(e) => e.name(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Vacuum,
    UniformSsAvg,
    AllFilled,
}

impl InitialKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Vacuum => "vacuum",
            Self::UniformSsAvg => "uniform_ss_avg",
            Self::AllFilled => "all_filled",
        }
    }
}

impl std::str::FromStr for InitialKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "vacuum" => Ok(Self::Vacuum),
            "uniform_ss_avg" => Ok(Self::UniformSsAvg),
            "all_filled" => Ok(Self::AllFilled),
            other => Err(format!("unknown initial state '{other}'")),
        }
    }
}

fn steady_state(spec: &ModelSpec) -> Result<CMatrix, DynamicsError> {
    let h = spec.h_eff()?;
    Ok(solve_steady_sylvester(&h, 2.0 * spec.gamma)?)
}

/// Initial covariance; `uniform_ss_avg` uses the mean steady-state occupation.
pub fn initial_state(kind: InitialKind, spec: &ModelSpec) -> Result<CMatrix, DynamicsError> {
    spec.validate()?;
    let n = spec.sites();
    match kind {
        InitialKind::Vacuum => Ok(CMatrix::zeros(n, n)),
        InitialKind::AllFilled if spec.statistics == Statistics::Boson => Err(DynamicsError::AllFilledBosons),
        InitialKind::AllFilled => Ok(CMatrix::identity(n)),
        InitialKind::UniformSsAvg => {
            let ss = steady_state(spec)?;
            let mean = ss.diagonal().iter().map(|z| z.re).sum::<f64>() / n as f64;
            Ok(CMatrix::identity(n).scale(C64::new(mean, 0.0)))
        }
    }
}

#[derive(Clone, Debug)]
pub struct CovarianceTrajectory {
    pub t_grid: Vec<f64>,
    /// `occupations[m][k] = n_{m+1}(t_k)`.
    pub occupations: Vec<Vec<f64>>,
    pub full_s: Option<Vec<CMatrix>>,
    pub spec: ModelSpec,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EvolveOptions {
    pub store_full: bool,
    /// Richardson check on the integrator plus comparison with the formal solution.
    pub verify: bool,
}

fn check_state(c: &CMatrix, stat: Statistics) -> Result<(), DynamicsError> {
    let scale = c.max_abs().max(1.0);
    let defect = c.hermiticity_defect();
    if defect > HERMITICITY_TOL * scale {
        return Err(DynamicsError::NotHermitian(defect));
    }
    let eig = SymmetricEigen::new(c.hermitian_part().to_nalgebra()).eigenvalues;
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo < -PAULI_TOL * scale {
        return Err(DynamicsError::PauliViolation(lo));
    }
    if stat == Statistics::Fermion && hi > 1.0 + PAULI_TOL {
        return Err(DynamicsError::PauliViolation(hi));
    }
    Ok(())
}

pub fn evolve_covariance(
    spec: &ModelSpec,
    s0: &CMatrix,
    t_grid: &[f64],
    opts: EvolveOptions,
) -> Result<CovarianceTrajectory, DynamicsError> {
    let h = spec.h_eff()?;
    let n = h.rows();
    let a = h.scale(C64::new(0.0, -1.0));
    let source = CMatrix::identity(n).scale(C64::new(2.0 * spec.gamma, 0.0));
    let traj = integrate_linear_ode(&a, s0, t_grid, OdeMode::Covariance, Some(&source), opts.verify)?;
    let stride = if n <= 40 { 1 } else { (traj.len() / 20).max(1) };
    for (k, c) in traj.iter().enumerate() {
        if k % stride == 0 || k + 1 == traj.len() {
            check_state(c, spec.statistics)?;
        }
    }
    if opts.verify {
        let formal = formal_solution(&a, s0, 2.0 * spec.gamma, t_grid)?;
        let worst = formal
            .iter()
            .zip(&traj)
            .map(|(f, c)| (f - c).max_abs() / c.max_abs().max(1.0))
            .fold(0.0, f64::max);
        if worst > FORMAL_SOLUTION_TOL {
            return Err(DynamicsError::FormalSolutionMismatch(worst));
        }
    }
    let occupations = (0..n).map(|m| traj.iter().map(|c| c[(m, m)].re).collect()).collect();
    Ok(CovarianceTrajectory {
        t_grid: t_grid.to_vec(),
        occupations,
        full_s: opts.store_full.then_some(traj),
        spec: spec.clone(),
    })
}

/// `C(t) = G C0 G† + pump * int_0^t G G† ds` with Gauss-Legendre nodes on every interval.
pub fn formal_solution(a: &CMatrix, s0: &CMatrix, pump: f64, t_grid: &[f64]) -> Result<Vec<CMatrix>, DynamicsError> {
    let n = a.rows();
    let (x, w) = gauss_legendre(GL_POINTS);
    let mut times = vec![0.0];
    for win in t_grid.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        times.extend(x.iter().map(|xi| lo + 0.5 * (hi - lo) * (xi + 1.0)));
        times.push(hi);
    }
    let gen = Banded::from_dense(a);
    let mut g_at = Vec::with_capacity(times.len());
    Rk4Grid::new(0.25 * step_size(gen.norm_inf())).run(
        CMatrix::identity(n).into_vec(),
        &times,
        |x, y| gen.apply_mat(x, n, y),
        |_, _, x| {
            g_at.push(CMatrix::new(n, n, x.to_vec()).expect("finite propagator"));
            true
        },
    )?;
    let ggd = |g: &CMatrix| g * &g.adjoint();
    let mut out = vec![s0.clone()];
    let mut integral = CMatrix::zeros(n, n);
    for (k, win) in t_grid.windows(2).enumerate() {
        let half = 0.5 * (win[1] - win[0]);
        let base = k * (GL_POINTS + 1) + 1;
        for (i, wi) in w.iter().enumerate() {
            integral = &integral + &ggd(&g_at[base + i]).scale(C64::new(wi * half * pump, 0.0));
        }
        let g = &g_at[base + GL_POINTS];
        out.push(&(&(g * s0) * &g.adjoint()) + &integral);
    }
    Ok(out)
}

/// `|n_m(t) - n_m(inf)| / n_m(inf)` with the steady state from the Lyapunov solve (site 1-based).
pub fn delta_n_curve(traj: &CovarianceTrajectory, m: usize) -> Result<Vec<f64>, DynamicsError> {
    let n = traj.occupations.len();
    if m == 0 || m > n {
        return Err(DynamicsError::InvalidSite(m, n));
    }
    let ss = steady_state(&traj.spec)?[(m - 1, m - 1)].re;
    if ss <= 0.0 {
        return Err(DynamicsError::ZeroSteadyState);
    }
    Ok(traj.occupations[m - 1].iter().map(|v| (v - ss).abs() / ss).collect())
}
