use std::f64::consts::LN_10;

use serde::Serialize;

use super::AnalysisError;
use crate::models::{hn_spectral_analytic, ModelKind, ModelSpec};
use crate::ndlinalg::{eigenvalues, poly_roots, step_size, Banded, CMatrix, LogComplex, Rk4Grid, C64};
use crate::propagator::{propagate_direct, spectral_terms};

#[derive(Clone, Debug, Serialize)]
pub struct LocalizationReport {
    pub eigenvalue: C64,
    /// Ascending polynomial coefficients after removal of vanishing extreme terms.
    pub coefficients: Vec<C64>,
    pub roots: Vec<C64>,
    pub exponents: Vec<f64>,
    pub phases: Vec<f64>,
    /// `1 / max A_i`.
    pub xi_extracted: f64,
    /// `1 / A` averaged over the middle pair of roots ordered by modulus.
    pub xi_gbz: f64,
    pub max_relative_residual: f64,
}

fn characteristic(spec: &ModelSpec, e: C64) -> Vec<C64> {
    let eps = e + C64::new(0.0, spec.gap());
    let r = |x: f64| C64::new(x, 0.0);
    match spec.kind {
        ModelKind::Hn => vec![r(0.5 * (spec.w + spec.kappa)), -eps, r(0.5 * (spec.w - spec.kappa))],
        ModelKind::Nnn => {
            let t = 0.5 * spec.t_nnn;
            vec![
                C64::from_polar(t, spec.phi),
                r(0.5 * (spec.w + spec.kappa)),
                -eps,
                r(0.5 * (spec.w - spec.kappa)),
                C64::from_polar(t, -spec.phi),
            ]
        }
        ModelKind::Ssh => {
            let (w, k, u, g) = (spec.w, spec.kappa, spec.u, spec.gamma_ssh);
            vec![
                r((u + g) * (w + k)),
                r((w * w - k * k) + (u * u - g * g)) - eps * eps * 4.0,
                r((w - k) * (u - g)),
            ]
        }
    }
}

fn strip(mut c: Vec<C64>) -> Vec<C64> {
    let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    while c.len() > 1 && c.last().unwrap().norm() <= 1e-14 * scale {
        c.pop();
    }
    while c.len() > 1 && c[0].norm() <= 1e-14 * scale {
        c.remove(0);
    }
    c
}

/// Roots of the model's characteristic polynomial in the transfer variable without
/// checking that `E` belongs to the spectrum.
pub fn localization_extract_unchecked(spec: &ModelSpec, e: C64) -> Result<LocalizationReport, AnalysisError> {
    spec.validate()?;
    let coefficients = strip(characteristic(spec, e));
    let pr = poly_roots(&coefficients)?;
    let mut roots = pr.roots;
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let exponents: Vec<f64> = roots.iter().map(|z| z.norm().ln()).collect();
    let phases: Vec<f64> = roots.iter().map(|z| z.arg()).collect();
    let max_relative_residual = roots
        .iter()
        .map(|&z| {
            let val = crate::ndlinalg::poly_eval(&coefficients, z).norm();
            let mag: f64 = coefficients.iter().enumerate().map(|(k, c)| c.norm() * z.norm().powi(k as i32)).sum();
            val / mag
        })
        .fold(0.0, f64::max);
    let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let k = exponents.len();
    let mid = if k >= 2 { 0.5 * (exponents[k / 2 - 1] + exponents[k / 2]) } else { exponents[0] };
    Ok(LocalizationReport {
        eigenvalue: e,
        coefficients,
        roots,
        exponents,
        phases,
        xi_extracted: 1.0 / top,
        xi_gbz: 1.0 / mid,
        max_relative_residual,
    })
}

/// Localization length from the transfer roots at an eigenvalue `E` of `H_eff`.
pub fn localization_extract(spec: &ModelSpec, e: C64) -> Result<LocalizationReport, AnalysisError> {
    let h = spec.h_eff()?;
    let dist = eigenvalues(&h)?.iter().map(|z| (z - e).norm()).fold(f64::INFINITY, f64::min);
    if dist > 1e-6 * h.norm_inf() {
        return Err(AnalysisError::NotAnEigenvalue(dist));
    }
    localization_extract_unchecked(spec, e)
}

#[derive(Clone, Debug, Serialize)]
pub struct InterferenceDump {
    pub m: usize,
    pub j: usize,
    pub t: f64,
    pub eigenvalues: Vec<C64>,
    pub terms: Vec<LogComplex>,
    pub max_term_log10: f64,
    /// `log10 |sum|` of the phase-weighted terms (meaningless once cancellation exceeds ~15 decades).
    pub naive_sum_log10: f64,
    /// `log10 |G|` from direct time stepping.
    pub stable_log10: f64,
    /// `log10 sum |term|`.
    pub abs_sum_log10: f64,
}

impl InterferenceDump {
    pub fn cancellation_decades(&self) -> f64 {
        self.max_term_log10 - self.stable_log10
    }
}

/// Spectral terms `psi^r_m(a) conj(psi^l_j(a)) e^{-i E_a t}` of an HN chain next to the stable value.
pub fn interference_terms(spec: &ModelSpec, m: usize, j: usize, t: f64) -> Result<InterferenceDump, AnalysisError> {
    let sp = hn_spectral_analytic(spec)?;
    let terms = spectral_terms(&sp, m, j, t)?;
    let max_term = terms.iter().map(|z| z.log_mag).fold(f64::NEG_INFINITY, f64::max);
    let abs_sum = LogComplex::sum(terms.iter().map(|z| LogComplex::new(z.log_mag, 0.0)));
    let naive = LogComplex::sum(terms.iter().copied());
    let h = spec.h_eff()?;
    let grid = if t > 0.0 { vec![0.0, t] } else { vec![0.0] };
    let direct = propagate_direct(&h, j, &grid)?;
    let stable = direct.iter().rev().find(|s| s.m == m).expect("sample for every site").g;
    Ok(InterferenceDump {
        m,
        j,
        t,
        eigenvalues: sp.eigenvalues.clone(),
        terms,
        max_term_log10: max_term / LN_10,
        naive_sum_log10: naive.log10_mag(),
        stable_log10: stable.log10_mag(),
        abs_sum_log10: abs_sum.log10_mag(),
    })
}

/// Peak of `t -> |G(m, j; t)|^2` by direct stepping on a uniform grid with a parabolic
/// refinement in `ln P`; returns `(t_peak, P_peak)`.
pub fn peak_height_direct(h_eff: &CMatrix, m: usize, j: usize, t_end: f64, dt: f64) -> Result<(f64, f64), AnalysisError> {
    let n = h_eff.require_square()?;
    if m == 0 || m > n || j == 0 || j > n {
        return Err(AnalysisError::InvalidInput(format!("sites ({m}, {j}) outside 1..={n}")));
    }
    let gen = Banded::from_dense(h_eff).scaled(C64::new(0.0, -1.0));
    let steps = (t_end / dt).ceil() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let mut x0 = vec![C64::new(0.0, 0.0); n];
    x0[j - 1] = C64::new(1.0, 0.0);
    let mut logp = Vec::with_capacity(grid.len());
    Rk4Grid::new(step_size(gen.norm_inf())).run(x0, &grid, |x, y| gen.apply(x, y), |_, _, x| {
        logp.push(x[m - 1].norm_sqr().ln());
        true
    })?;
    let (k, _) = logp.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    if k == 0 || k + 1 == logp.len() {
        return Err(AnalysisError::InvalidInput("peak not bracketed by the time window".into()));
    }
    let (a, b, c) = (logp[k - 1], logp[k], logp[k + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    let peak = b - 0.25 * (a - c) * shift;
    Ok((grid[k] + shift * dt, peak.exp()))
}

/// Peak heights of `P(m, j; t)` for every source site `j = 1..=m-1` (entry `j-1`).
pub fn propagation_heights(h_eff: &CMatrix, m: usize, delta: f64, dt: f64) -> Result<Vec<f64>, AnalysisError> {
    let t_end = 4.0 * (m as f64 + 5.0) / delta;
    (1..m).map(|j| peak_height_direct(h_eff, m, j, t_end, dt).map(|p| p.1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{hn_xi_loc, ssh_xi_pair, Statistics};

    #[test]
    fn hn_vieta() {
        let s = ModelSpec::hn(Statistics::Fermion, 40, 1.0, 0.999, 0.0, 0.05);
        let e = eigenvalues(&s.h_eff().unwrap()).unwrap()[7];
        let r = localization_extract(&s, e).unwrap();
        let mean = 0.5 * (r.exponents[0] + r.exponents[1]);
        assert!((mean - 1.0 / hn_xi_loc(1.0, 0.999)).abs() < 1e-9);
        assert!((r.xi_extracted - 0.263144).abs() < 1e-6);
        assert!(matches!(localization_extract(&s, C64::new(5.0, 0.0)), Err(AnalysisError::NotAnEigenvalue(_))));
    }

    #[test]
    fn ssh_zero_energy_gives_min_length() {
        let s = ModelSpec::ssh(Statistics::Boson, 30, 1.0, 0.5, 1.0, 0.99, 0.1);
        let r = localization_extract_unchecked(&s, C64::new(0.0, -s.gap())).unwrap();
        let (x1, x2) = ssh_xi_pair(&s);
        assert!((r.xi_extracted - x1.min(x2)).abs() < 1e-9);
    }
}
