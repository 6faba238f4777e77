//! Exact Fock-space Lindblad evolution for short fermionic Hatano-Nelson chains.
//!
//! Operators are dense `2^L x 2^L` matrices in the occupation basis, bit `j` of a basis
//! index being the occupancy of site `j`. Annihilators carry the Jordan-Wigner string
//! `(-1)^{n_0 + ... + n_{j-1}}`.

use nalgebra::linalg::SymmetricEigen;
use serde::Serialize;
use thiserror::Error;

use crate::models::{bond_jump_vector, build_hn, hn_spectral_analytic, local_loss_rates, ModelError, ModelKind, ModelSpec, Statistics};
use crate::ndlinalg::{solve_steady_sylvester, step_size, Banded, CMatrix, LinalgError, Rk4Grid, C64};

pub const MAX_SITES: usize = 4;
pub const MAX_SUPEROPERATOR_SITES: usize = 3;
const TRACE_TOL: f64 = 1e-8;
const POSITIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle limited to {max} sites, got {got}")]
    TooLarge { got: usize, max: usize },
    #[error("oracle supports fermionic HN chains only")]
    UnsupportedModel,
    #[error("trace drifted to {0}")]
    TraceDrift(f64),
    #[error("density matrix lost positivity (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("adjoint Liouvillian maps the identity to norm {0:e}")]
    IdentityNotAnnihilated(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl OracleError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::TooLarge { .. } => "TooLarge",
            Self::UnsupportedModel => "UnsupportedModel",
            Self::TraceDrift(_) => "TraceDrift",
            Self::NotPositive(_) => "NotPositive",
            Self::IdentityNotAnnihilated(_) => "IdentityNotAnnihilated",
            Self::Model(e) => e.name(),
            Self::Linalg(e) => e.name(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FockState {
    Vacuum,
    AllFilled,
}

#[derive(Clone, Debug)]
pub struct FockLindblad {
    pub l: usize,
    pub hamiltonian: CMatrix,
    /// `(X, r)` entering as `r (X rho X† - {X†X, rho}/2)`.
    pub jump_ops: Vec<(CMatrix, f64)>,
    pub annihilators: Vec<CMatrix>,
    pub rho: CMatrix,
}

fn annihilator(l: usize, site: usize) -> CMatrix {
    let dim = 1usize << l;
    let mut c = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        if s >> site & 1 == 1 {
            let string = (s & ((1 << site) - 1)).count_ones();
            c[(s ^ (1 << site), s)] = C64::new(if string % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        }
    }
    c
}

fn basis_projector(dim: usize, s: usize) -> CMatrix {
    let mut rho = CMatrix::zeros(dim, dim);
    rho[(s, s)] = C64::new(1.0, 0.0);
    rho
}

fn combine(ops: &[CMatrix], coeffs: &[C64]) -> CMatrix {
    let dim = ops[0].rows();
    let mut out = CMatrix::zeros(dim, dim);
    for (op, &k) in ops.iter().zip(coeffs) {
        if k.norm() != 0.0 {
            out = &out + &op.scale(k);
        }
    }
    out
}

pub fn build_fock_lindblad(spec: &ModelSpec, start: FockState) -> Result<FockLindblad, OracleError> {
    if spec.kind != ModelKind::Hn || spec.statistics != Statistics::Fermion {
        return Err(OracleError::UnsupportedModel);
    }
    spec.validate()?;
    let l = spec.l;
    if l > MAX_SITES {
        return Err(OracleError::TooLarge { got: l, max: MAX_SITES });
    }
    let dim = 1usize << l;
    let c: Vec<CMatrix> = (0..l).map(|j| annihilator(l, j)).collect();
    let cd: Vec<CMatrix> = c.iter().map(CMatrix::adjoint).collect();
    let mut h = CMatrix::zeros(dim, dim);
    for j in 0..l.saturating_sub(1) {
        let hop = &cd[j + 1] * &c[j];
        h = &h + &(&hop + &hop.adjoint()).scale(C64::new(0.5 * spec.w, 0.0));
    }
    let mut jump_ops = Vec::new();
    for b in 0..l.saturating_sub(1) {
        jump_ops.push((combine(&c, &bond_jump_vector(l, b)), spec.kappa));
    }
    for (j, lam) in local_loss_rates(spec).into_iter().enumerate() {
        jump_ops.push((c[j].clone(), 2.0 * lam));
    }
    for op in &cd {
        jump_ops.push((op.clone(), 2.0 * spec.gamma));
    }
    let rho = basis_projector(dim, if start == FockState::Vacuum { 0 } else { dim - 1 });
    Ok(FockLindblad { l, hamiltonian: h, jump_ops, annihilators: c, rho })
}

impl FockLindblad {
    pub fn dim(&self) -> usize {
        self.hamiltonian.rows()
    }

    /// `L(rho) = -i[H, rho] + sum r (X rho X† - {X†X, rho}/2)`.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let i = C64::new(0.0, 1.0);
        let comm = &(&self.hamiltonian * rho) - &(rho * &self.hamiltonian);
        let mut out = comm.scale(-i);
        for (x, r) in &self.jump_ops {
            let xd = x.adjoint();
            let xdx = &xd * x;
            let sand = &(x * rho) * &xd;
            let anti = &(&xdx * rho) + &(rho * &xdx);
            out = &out + &(&sand - &anti.scale(C64::new(0.5, 0.0))).scale(C64::new(*r, 0.0));
        }
        out
    }

    /// Heisenberg-picture generator `L†(O) = i[H, O] + sum r (X† O X - {X†X, O}/2)`.
    pub fn apply_adjoint(&self, op: &CMatrix) -> CMatrix {
        let i = C64::new(0.0, 1.0);
        let comm = &(&self.hamiltonian * op) - &(op * &self.hamiltonian);
        let mut out = comm.scale(i);
        for (x, r) in &self.jump_ops {
            let xd = x.adjoint();
            let xdx = &xd * x;
            let sand = &(&xd * op) * x;
            let anti = &(&xdx * op) + &(op * &xdx);
            out = &out + &(&sand - &anti.scale(C64::new(0.5, 0.0))).scale(C64::new(*r, 0.0));
        }
        out
    }

    /// Explicit matrix of a linear map on row-major vectorised operators.
    fn superoperator(&self, map: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
        let dim = self.dim();
        let n = dim * dim;
        let mut sup = CMatrix::zeros(n, n);
        for col in 0..n {
            let mut e = CMatrix::zeros(dim, dim);
            e[(col / dim, col % dim)] = C64::new(1.0, 0.0);
            for (row, v) in map(&e).as_slice().iter().enumerate() {
                sup[(row, col)] = *v;
            }
        }
        sup
    }

    pub fn number_operator(&self, site: usize) -> CMatrix {
        let c = &self.annihilators[site];
        &c.adjoint() * c
    }
}

fn trace(m: &CMatrix) -> C64 {
    m.diagonal().into_iter().sum()
}

fn min_eigenvalue(m: &CMatrix) -> f64 {
    let herm = m.hermitian_part().to_nalgebra();
    SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Site occupations `tr(rho c_m† c_m)` on the grid; result indexed `[time][site]`.
pub fn lindblad_brute(fl: &FockLindblad, t_grid: &[f64]) -> Result<Vec<Vec<f64>>, OracleError> {
    let dim = fl.dim();
    let sup = Banded::from_dense(&fl.superoperator(|r| fl.apply(r)));
    let numbers: Vec<CMatrix> = (0..fl.l).map(|m| fl.number_operator(m)).collect();
    let mut out = Vec::with_capacity(t_grid.len());
    let mut failure = None;
    Rk4Grid::new(0.25 * step_size(sup.norm_inf())).run(
        fl.rho.as_slice().to_vec(),
        t_grid,
        |x, y| sup.apply(x, y),
        |_, _, x| {
            let rho = CMatrix::new(dim, dim, x.to_vec()).expect("finite density matrix");
            let tr = trace(&rho);
            if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
                failure = Some(OracleError::TraceDrift(tr.re));
                return false;
            }
            let lo = min_eigenvalue(&rho);
            if lo < -POSITIVITY_TOL {
                failure = Some(OracleError::NotPositive(lo));
                return false;
            }
            out.push(numbers.iter().map(|n| trace(&(&rho * n)).re).collect());
            true
        },
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Residuals of the left-eigenmode construction on every pair of single-particle modes.
#[derive(Clone, Debug, Serialize)]
pub struct ThirdQuantizationReport {
    pub pairs: usize,
    /// `|L†(1)|`.
    pub identity_residual: f64,
    /// Worst `|L†(l) - lambda l| / |l|` with `lambda = -i(E_b - E_a*)`.
    pub eigen_residual: f64,
    /// Same with the rapidity combination `-i(E_b* - E_a)`.
    pub eigen_residual_alt: f64,
    /// Worst mismatch between the closed-form shift and the steady-state sandwich.
    pub shift_residual: f64,
    /// Closed-form shift written with `E_a - E_b*` in the denominator.
    pub shift_residual_alt: f64,
    /// Largest `|Re lambda + 2 Delta|` on the diagonal pairs.
    pub diagonal_rate_defect: f64,
    pub passed: bool,
}

pub const THIRD_QUANTIZATION_TOL: f64 = 1e-8;

pub fn third_quantization_check(spec: &ModelSpec) -> Result<ThirdQuantizationReport, OracleError> {
    if spec.l > MAX_SUPEROPERATOR_SITES {
        return Err(OracleError::TooLarge { got: spec.l, max: MAX_SUPEROPERATOR_SITES });
    }
    let fl = build_fock_lindblad(spec, FockState::Vacuum)?;
    let dim = fl.dim();
    let sup = fl.superoperator(|o| fl.apply_adjoint(o));
    let apply_sup = |o: &CMatrix| CMatrix::new(dim, dim, sup.matvec(o.as_slice())).expect("finite operator");

    let ident = CMatrix::identity(dim);
    let identity_residual = apply_sup(&ident).norm_fro();
    if identity_residual > THIRD_QUANTIZATION_TOL {
        return Err(OracleError::IdentityNotAnnihilated(identity_residual));
    }

    let (h_eff, data) = build_hn(spec)?;
    let spectrum = hn_spectral_analytic(spec)?;
    let left = spectrum.left.to_dense()?;
    let steady = solve_steady_sylvester(&h_eff, 2.0 * spec.gamma)?;
    let n = spec.l;
    let cd: Vec<CMatrix> = fl.annihilators.iter().map(CMatrix::adjoint).collect();
    let i = C64::new(0.0, 1.0);

    let mut report = ThirdQuantizationReport {
        pairs: n * n,
        identity_residual,
        eigen_residual: 0.0,
        eigen_residual_alt: 0.0,
        shift_residual: 0.0,
        shift_residual_alt: 0.0,
        diagonal_rate_defect: 0.0,
        passed: false,
    };
    for a in 0..n {
        for b in 0..n {
            let (ea, eb) = (spectrum.eigenvalues[a], spectrum.eigenvalues[b]);
            let weight = |p: usize, q: usize| left[(p, a)] * left[(q, b)].conj();
            let mut pump = C64::new(0.0, 0.0);
            let mut sandwich = C64::new(0.0, 0.0);
            let mut quad = CMatrix::zeros(dim, dim);
            for p in 0..n {
                for q in 0..n {
                    let wgt = weight(p, q);
                    pump += wgt * data.pmat[(p, q)];
                    // <c_p† c_q> sits at row q, column p of the covariance.
                    sandwich += wgt * steady[(q, p)];
                    quad = &quad + &(&cd[p] * &fl.annihilators[q]).scale(wgt);
                }
            }
            let shift = i * pump / (ea.conj() - eb);
            let shift_alt = -i * pump / (ea - eb.conj());
            let scale = sandwich.norm().max(shift.norm()).max(1e-300);
            report.shift_residual = report.shift_residual.max((shift - sandwich).norm() / scale.max(1.0));
            report.shift_residual_alt = report.shift_residual_alt.max((shift_alt - sandwich).norm() / scale.max(1.0));

            let lhat = &quad - &ident.scale(shift);
            let image = apply_sup(&lhat);
            let norm = lhat.norm_fro();
            let lam = -i * (eb - ea.conj());
            let lam_alt = -i * (eb.conj() - ea);
            report.eigen_residual = report.eigen_residual.max((&image - &lhat.scale(lam)).norm_fro() / norm);
            report.eigen_residual_alt = report.eigen_residual_alt.max((&image - &lhat.scale(lam_alt)).norm_fro() / norm);
            if a == b {
                report.diagonal_rate_defect = report.diagonal_rate_defect.max((lam.re + 2.0 * spec.gap()).abs() + lam.im.abs());
            }
        }
    }
    report.passed = report.eigen_residual <= THIRD_QUANTIZATION_TOL && report.shift_residual <= THIRD_QUANTIZATION_TOL;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anticommutation() {
        let l = 3;
        let c: Vec<CMatrix> = (0..l).map(|j| annihilator(l, j)).collect();
        for a in 0..l {
            for b in 0..l {
                let cd = c[b].adjoint();
                let ac = &(&c[a] * &cd) + &(&cd * &c[a]);
                let want = if a == b { CMatrix::identity(8) } else { CMatrix::zeros(8, 8) };
                assert!((&ac - &want).max_abs() < 1e-15);
                let aa = &(&c[a] * &c[b]) + &(&c[b] * &c[a]);
                assert!(aa.max_abs() < 1e-15);
            }
        }
    }

    #[test]
    fn operator_counts() {
        let one = ModelSpec::hn(Statistics::Fermion, 1, 1.0, 0.3, 0.5, 0.1);
        assert_eq!(build_fock_lindblad(&one, FockState::Vacuum).unwrap().jump_ops.len(), 2);
        let two = one.with_l(2);
        assert_eq!(build_fock_lindblad(&two, FockState::Vacuum).unwrap().jump_ops.len(), 5);
        assert!(matches!(build_fock_lindblad(&one.with_l(5), FockState::Vacuum), Err(OracleError::TooLarge { .. })));
        let boson = one.with_statistics(Statistics::Boson);
        assert_eq!(build_fock_lindblad(&boson, FockState::Vacuum).unwrap_err(), OracleError::UnsupportedModel);
    }

    #[test]
    fn vacuum_is_dark_without_pump() {
        let s = ModelSpec::hn(Statistics::Fermion, 2, 1.0, 0.5, 0.0, 0.0);
        let fl = build_fock_lindblad(&s, FockState::Vacuum).unwrap();
        let occ = lindblad_brute(&fl, &[0.0, 1.0, 4.0]).unwrap();
        assert!(occ.iter().flatten().all(|&n| n.abs() < 1e-14));
    }
}
