//! Lattice models: effective Hamiltonians, Lindblad data and derived scales.
//!
//! Sign conventions: [`Statistics::sign`] is `+1` for fermions and `-1` for bosons, so the
//! effective Hamiltonian is `H - (i/2)(L + sign * P)` and the gap is `kappa + lambda + sign * Gamma`.
//! Site indices are 0-based in code; the exponential gauge uses 1-based positions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ndlinalg::{eig_similarity_hn, CMatrix, LinalgError, Spectrum, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum ModelKind {
    #[serde(rename = "HN", alias = "hn")]
    Hn,
    #[serde(rename = "SSH", alias = "ssh")]
    Ssh,
    #[serde(rename = "NNN", alias = "nnn")]
    Nnn,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Hn => "HN",
            Self::Ssh => "SSH",
            Self::Nnn => "NNN",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Fermion,
    Boson,
}

impl Statistics {
    pub fn sign(self) -> f64 {
        match self {
            Self::Fermion => 1.0,
            Self::Boson => -1.0,
        }
    }
    pub fn label(self) -> &'static str {
        match self {
            Self::Fermion => "fermion",
            Self::Boson => "boson",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub statistics: Statistics,
    #[serde(rename = "L")]
    pub l: usize,
    pub w: f64,
    pub kappa: f64,
    #[serde(default)]
    pub lambda_loss: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub u: f64,
    #[serde(default)]
    pub gamma_ssh: f64,
    #[serde(rename = "T_nnn", default)]
    pub t_nnn: f64,
    #[serde(default)]
    pub phi: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("internal statistics sign inconsistency")]
    InvalidStatisticsSign,
    #[error("bosons are unstable: gap {0} <= 0")]
    BosonUnstable(f64),
    #[error("kappa = w has no biorthogonal eigenbasis; use the closed forms")]
    PerfectNonreciprocity,
    #[error("{0} is not defined analytically for this model")]
    UnsetForModel(&'static str),
    #[error("operation requires a {0} model")]
    WrongModel(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl ModelError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::InvalidParameters(_) => "InvalidParameters",
            Self::InvalidStatisticsSign => "InvalidStatisticsSign",
            Self::BosonUnstable(_) => "BosonUnstable",
            Self::PerfectNonreciprocity => "PerfectNonreciprocity",
            Self::UnsetForModel(_) => "UnsetForModel",
            Self::WrongModel(_) => "WrongModel",
            Self::Linalg(e) => e.name(),
        }
    }
}

impl ModelSpec {
    pub fn hn(statistics: Statistics, l: usize, w: f64, kappa: f64, lambda_loss: f64, gamma: f64) -> Self {
        Self {
            kind: ModelKind::Hn,
            statistics,
            l,
            w,
            kappa,
            lambda_loss,
            gamma,
            u: 0.0,
            gamma_ssh: 0.0,
            t_nnn: 0.0,
            phi: 0.0,
        }
    }

    pub fn ssh(statistics: Statistics, cells: usize, w: f64, kappa: f64, u: f64, gamma_ssh: f64, gamma: f64) -> Self {
        Self { kind: ModelKind::Ssh, u, gamma_ssh, ..Self::hn(statistics, cells, w, kappa, 0.0, gamma) }
    }

    pub fn nnn(statistics: Statistics, l: usize, w: f64, kappa: f64, t_nnn: f64, phi: f64, gamma: f64) -> Self {
        Self { kind: ModelKind::Nnn, t_nnn, phi, ..Self::hn(statistics, l, w, kappa, 0.0, gamma) }
    }

    pub fn with_statistics(&self, statistics: Statistics) -> Self {
        Self { statistics, ..self.clone() }
    }
    pub fn with_l(&self, l: usize) -> Self {
        Self { l, ..self.clone() }
    }

    /// Number of lattice sites (twice the cell count for SSH).
    pub fn sites(&self) -> usize {
        match self.kind {
            ModelKind::Ssh => 2 * self.l,
            _ => self.l,
        }
    }

    /// Uniform decay rate `|Im E|` of every eigenvalue.
    pub fn gap(&self) -> f64 {
        let s = self.statistics.sign();
        match self.kind {
            ModelKind::Hn => self.kappa + self.lambda_loss + s * self.gamma,
            ModelKind::Ssh => s * self.gamma + 0.5 * (self.kappa + self.gamma_ssh),
            ModelKind::Nnn => self.kappa + s * self.gamma,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let reals = [self.w, self.kappa, self.lambda_loss, self.gamma, self.u, self.gamma_ssh, self.t_nnn, self.phi];
        if reals.iter().any(|x| !x.is_finite()) {
            return Err(ModelError::InvalidParameters("non-finite parameter".into()));
        }
        if self.w < 0.0 || self.kappa < 0.0 || self.lambda_loss < 0.0 || self.gamma < 0.0 {
            return Err(ModelError::InvalidParameters("w, kappa, lambda_loss and Gamma must be >= 0".into()));
        }
        let min_l = match self.kind {
            ModelKind::Hn => 1,
            ModelKind::Ssh => 2,
            ModelKind::Nnn => 3,
        };
        if self.l < min_l {
            return Err(ModelError::InvalidParameters(format!("L must be >= {min_l}")));
        }
        match self.kind {
            ModelKind::Hn | ModelKind::Nnn if self.kappa > self.w => {
                return Err(ModelError::InvalidParameters("kappa must not exceed w".into()));
            }
            ModelKind::Ssh if self.kappa > self.w || self.gamma_ssh.abs() > self.u => {
                return Err(ModelError::InvalidParameters("need kappa <= w and |gamma_ssh| <= u".into()));
            }
            _ => {}
        }
        if self.statistics == Statistics::Boson && self.gap() <= 0.0 {
            return Err(ModelError::BosonUnstable(self.gap()));
        }
        Ok(())
    }

    fn require(&self, kind: ModelKind) -> Result<(), ModelError> {
        if self.kind != kind {
            return Err(ModelError::WrongModel(kind.label()));
        }
        self.validate()
    }

    /// Effective Hamiltonian of whichever model `kind` names.
    pub fn h_eff(&self) -> Result<CMatrix, ModelError> {
        match self.kind {
            ModelKind::Hn => Ok(build_hn(self)?.0),
            ModelKind::Ssh => build_ssh(self),
            ModelKind::Nnn => build_nnn(self),
        }
    }
}

/// Single-particle Hamiltonian, loss and pump matrices of a quadratic Lindbladian.
#[derive(Clone, Debug)]
pub struct LindbladData {
    pub h: CMatrix,
    pub lmat: CMatrix,
    pub pmat: CMatrix,
}

impl LindbladData {
    /// `H - (i/2)(L + sign P)`.
    pub fn h_eff(&self, statistics: Statistics) -> CMatrix {
        let n = self.h.rows();
        let s = statistics.sign();
        CMatrix::from_fn(n, n, |i, j| {
            self.h[(i, j)] - C64::new(0.0, 0.5) * (self.lmat[(i, j)] + self.pmat[(i, j)] * s)
        })
    }
}

/// Local loss rates `lambda_j`: the edge sites, which touch a single correlated-loss bond,
/// get `kappa/2` extra so the total on-site loss is uniform.
pub fn local_loss_rates(spec: &ModelSpec) -> Vec<f64> {
    let l = spec.l;
    (0..l)
        .map(|j| {
            let edges = usize::from(j == 0) + usize::from(j + 1 == l);
            spec.lambda_loss + 0.5 * spec.kappa * edges as f64
        })
        .collect()
}

/// Correlated-loss jump vector `x` for bond `(j, j+1)`: the operator `c_j - i c_{j+1}`.
pub fn bond_jump_vector(l: usize, j: usize) -> Vec<C64> {
    let mut x = vec![C64::new(0.0, 0.0); l];
    x[j] = C64::new(1.0, 0.0);
    x[j + 1] = C64::new(0.0, -1.0);
    x
}

pub fn hn_lindblad_data(spec: &ModelSpec) -> Result<LindbladData, ModelError> {
    spec.require(ModelKind::Hn)?;
    let l = spec.l;
    let half_w = C64::new(0.5 * spec.w, 0.0);
    let h = CMatrix::from_fn(l, l, |i, j| if i.abs_diff(j) == 1 { half_w } else { C64::new(0.0, 0.0) });
    let mut lmat = CMatrix::zeros(l, l);
    for b in 0..l.saturating_sub(1) {
        let x = bond_jump_vector(l, b);
        for n in [b, b + 1] {
            for m in [b, b + 1] {
                lmat[(n, m)] += x[n].conj() * x[m] * spec.kappa;
            }
        }
    }
    for (j, lam) in local_loss_rates(spec).into_iter().enumerate() {
        lmat[(j, j)] += C64::new(2.0 * lam, 0.0);
    }
    let pmat = CMatrix::identity(l).scale(C64::new(2.0 * spec.gamma, 0.0));
    Ok(LindbladData { h, lmat, pmat })
}

/// Tridiagonal HN matrix: `(w+kappa)/2` hopping rightwards (`H[j+1][j]`), `(w-kappa)/2` leftwards,
/// diagonal `-i(kappa + lambda +- Gamma)`; checked against the Lindblad-data construction.
pub fn build_hn(spec: &ModelSpec) -> Result<(CMatrix, LindbladData), ModelError> {
    spec.require(ModelKind::Hn)?;
    let l = spec.l;
    let down = C64::new(0.5 * (spec.w + spec.kappa), 0.0);
    let up = C64::new(0.5 * (spec.w - spec.kappa), 0.0);
    let diag = C64::new(0.0, -spec.gap());
    let h = CMatrix::from_fn(l, l, |i, j| {
        if i == j {
            diag
        } else if i == j + 1 {
            down
        } else if j == i + 1 {
            up
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let data = hn_lindblad_data(spec)?;
    let other = data.h_eff(spec.statistics);
    if (&h - &other).max_abs() > 1e-12 * (1.0 + h.max_abs()) {
        return Err(ModelError::InvalidStatisticsSign);
    }
    Ok((h, data))
}

/// Two-band chain `A_1 B_1 A_2 B_2 ... A_L B_L`.
pub fn build_ssh(spec: &ModelSpec) -> Result<CMatrix, ModelError> {
    spec.require(ModelKind::Ssh)?;
    let n = spec.sites();
    let mut h = CMatrix::identity(n).scale(C64::new(0.0, -spec.gap()));
    for c in 0..spec.l {
        let (a, b) = (2 * c, 2 * c + 1);
        h[(b, a)] = C64::new(0.5 * (spec.w + spec.kappa), 0.0);
        h[(a, b)] = C64::new(0.5 * (spec.w - spec.kappa), 0.0);
        if c + 1 < spec.l {
            let next_a = 2 * c + 2;
            h[(next_a, b)] = C64::new(0.5 * (spec.u + spec.gamma_ssh), 0.0);
            h[(b, next_a)] = C64::new(0.5 * (spec.u - spec.gamma_ssh), 0.0);
        }
    }
    Ok(h)
}

/// HN chain plus next-nearest hopping `(T/2) e^{i phi}` rightwards and `(T/2) e^{-i phi}` leftwards.
pub fn build_nnn(spec: &ModelSpec) -> Result<CMatrix, ModelError> {
    spec.require(ModelKind::Nnn)?;
    let l = spec.l;
    let mut h = CMatrix::identity(l).scale(C64::new(0.0, -spec.gap()));
    for j in 0..l - 1 {
        h[(j + 1, j)] = C64::new(0.5 * (spec.w + spec.kappa), 0.0);
        h[(j, j + 1)] = C64::new(0.5 * (spec.w - spec.kappa), 0.0);
    }
    let t = 0.5 * spec.t_nnn;
    for j in 0..l - 2 {
        h[(j + 2, j)] = C64::from_polar(t, spec.phi);
        h[(j, j + 2)] = C64::from_polar(t, -spec.phi);
    }
    Ok(h)
}

/// Characteristic scales of a model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scales {
    /// Renormalised hopping `sqrt((w+kappa)(w-kappa))` (HN).
    pub j: f64,
    pub xi_loc: f64,
    pub delta: f64,
    pub xi_prop: Option<f64>,
    pub tau_evec: f64,
    /// SSH only: the two sublattice localization lengths.
    pub xi_pair: Option<(f64, f64)>,
}

impl Scales {
    pub fn xi_prop(&self) -> Result<f64, ModelError> {
        self.xi_prop.ok_or(ModelError::UnsetForModel("xi_prop"))
    }
    /// Same length in the convention where the peak height scales as `exp(-+2 d / xi)`.
    pub fn xi_prop_double_rate(&self) -> Result<f64, ModelError> {
        Ok(2.0 * self.xi_prop()?)
    }
}

/// `1 / xi_loc = (1/2) ln((w+kappa)/(w-kappa))`; infinite when reciprocal, zero at `kappa = w`.
pub fn hn_xi_loc(w: f64, kappa: f64) -> f64 {
    1.0 / (0.5 * ((w + kappa) / (w - kappa)).ln())
}

/// `1/xi_prop = -+ 2 ln(w / (w +- Gamma))`.
pub fn xi_prop(w: f64, gamma: f64, statistics: Statistics) -> f64 {
    let s = statistics.sign();
    1.0 / (-s * 2.0 * (w / (w + s * gamma)).ln())
}

/// SSH `(xi_1, xi_2)` with `e^{1/xi_1} = (u+gamma)/(w-kappa)`, `e^{1/xi_2} = (w+kappa)/(u-gamma)`.
pub fn ssh_xi_pair(spec: &ModelSpec) -> (f64, f64) {
    let x1 = 1.0 / ((spec.u + spec.gamma_ssh) / (spec.w - spec.kappa)).ln();
    let x2 = 1.0 / ((spec.w + spec.kappa) / (spec.u - spec.gamma_ssh)).ln();
    (x1, x2)
}

pub fn derived_scales(spec: &ModelSpec) -> Result<Scales, ModelError> {
    spec.validate()?;
    let delta = spec.gap();
    match spec.kind {
        ModelKind::Hn => {
            let xi_loc = hn_xi_loc(spec.w, spec.kappa);
            Ok(Scales {
                j: ((spec.w + spec.kappa) * (spec.w - spec.kappa)).sqrt(),
                xi_loc,
                delta,
                xi_prop: Some(xi_prop(spec.w, spec.gamma, spec.statistics)),
                tau_evec: spec.l as f64 / (xi_loc * delta),
                xi_pair: None,
            })
        }
        ModelKind::Ssh => {
            let (x1, x2) = ssh_xi_pair(spec);
            let xi_loc = x1.min(x2);
            Ok(Scales {
                j: f64::NAN,
                xi_loc,
                delta,
                xi_prop: None,
                tau_evec: spec.l as f64 / (xi_loc * delta),
                xi_pair: Some((x1, x2)),
            })
        }
        ModelKind::Nnn => Err(ModelError::UnsetForModel("xi_loc")),
    }
}

/// `E_a = J cos k_a - i Delta`, `k_a = a pi/(L+1)`, vectors `sqrt(2/(L+1)) e^{+-j/xi} sin(k_a j)`.
///
/// Eigenvalues are ordered by increasing real part, i.e. `a = L, L-1, ..., 1`.
pub fn hn_spectral_analytic(spec: &ModelSpec) -> Result<Spectrum, ModelError> {
    spec.require(ModelKind::Hn)?;
    if spec.kappa >= spec.w {
        return Err(ModelError::PerfectNonreciprocity);
    }
    let l = spec.l;
    let scales = derived_scales(spec)?;
    let norm = (2.0 / (l as f64 + 1.0)).sqrt();
    let alphas: Vec<usize> = (1..=l).rev().collect();
    let base = CMatrix::from_fn(l, l, |j, col| {
        let k = alphas[col] as f64 * std::f64::consts::PI / (l as f64 + 1.0);
        C64::new(norm * (k * (j + 1) as f64).sin(), 0.0)
    });
    let eigenvalues: Vec<C64> = alphas
        .iter()
        .map(|&a| {
            let k = a as f64 * std::f64::consts::PI / (l as f64 + 1.0);
            C64::new(scales.j * k.cos(), -scales.delta)
        })
        .collect();
    let (right_scale, left_scale): (Vec<f64>, Vec<f64>) = if scales.xi_loc.is_finite() {
        (1..=l).map(|j| (j as f64 / scales.xi_loc, -(j as f64) / scales.xi_loc)).unzip()
    } else {
        (vec![0.0; l], vec![0.0; l])
    };
    let overlap = &base.transpose() * &base;
    let biorth_residual = (&overlap - &CMatrix::identity(l)).max_abs();
    Ok(Spectrum {
        eigenvalues,
        right: crate::ndlinalg::ScaledVectors::new(base.clone(), right_scale)?,
        left: crate::ndlinalg::ScaledVectors::new(base, left_scale)?,
        biorth_residual,
        eig_residual: 0.0,
        scale_overflow: l as f64 / scales.xi_loc > 650.0,
    })
}

/// Numerical spectrum of an HN chain through the symmetric gauge map.
pub fn hn_spectrum_similarity(spec: &ModelSpec) -> Result<Spectrum, ModelError> {
    let (h, _) = build_hn(spec)?;
    let xi = hn_xi_loc(spec.w, spec.kappa);
    Ok(eig_similarity_hn(&h, xi)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_rejects_unknown_fields() {
        let s = ModelSpec::hn(Statistics::Boson, 10, 1.0, 0.5, 0.0, 0.1);
        let js = serde_json::to_string(&s).unwrap();
        assert!(js.contains("\"L\":10") && js.contains("\"Gamma\":0.1") && js.contains("\"T_nnn\""));
        assert_eq!(serde_json::from_str::<ModelSpec>(&js).unwrap(), s);
        let bad = js.replace("\"phi\"", "\"psi\"");
        assert!(serde_json::from_str::<ModelSpec>(&bad).is_err());
    }

    #[test]
    fn hn_entries() {
        let s = ModelSpec::hn(Statistics::Fermion, 6, 1.0, 0.999, 0.0, 0.05);
        let (h, _) = build_hn(&s).unwrap();
        assert!((h[(0, 0)] - C64::new(0.0, -1.049)).norm() < 1e-15);
        assert!((h[(1, 0)].re - 0.9995).abs() < 1e-15 && (h[(0, 1)].re - 0.0005).abs() < 1e-15);
    }

    #[test]
    fn unstable_bosons_rejected() {
        let s = ModelSpec::hn(Statistics::Boson, 6, 1.0, 0.2, 0.0, 0.3);
        assert!(matches!(build_hn(&s), Err(ModelError::BosonUnstable(g)) if g < 0.0));
    }
}
