//! Fits and diagnostics built on top of relaxation runs and propagators.

mod localization;
mod sweep;

pub use localization::{
    interference_terms, localization_extract, localization_extract_unchecked, peak_height_direct, propagation_heights,
    InterferenceDump, LocalizationReport,
};
pub use sweep::{
    run_sweep, saturation_study, tau_sat, SaturationPoint, SaturationReport, SweepAxis, SweepPoint, SweepResult,
    DEFAULT_SATURATION_GAMMAS, PLATEAU_L,
};

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::models::{derived_scales, ModelError, ModelKind, ModelSpec, Statistics};
use crate::ndlinalg::LinalgError;
use crate::propagator::PropagatorError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("need at least {need} points, got {got}")]
    InsufficientPoints { need: usize, got: usize },
    #[error("no localization length available for this model")]
    MissingXi,
    #[error("no plateau in tau(L) up to L = {0}")]
    NoPlateau(usize),
    #[error("fitted slope {0} has the wrong sign for this statistics")]
    WrongSignSlope(f64),
    #[error("E is not an eigenvalue (distance {0:e})")]
    NotAnEigenvalue(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Propagator(#[from] PropagatorError),
}

impl AnalysisError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::InsufficientPoints { .. } => "InsufficientPoints",
            Self::MissingXi => "MissingXi",
            Self::NoPlateau(_) => "NoPlateau",
            Self::WrongSignSlope(_) => "WrongSignSlope",
            Self::NotAnEigenvalue(_) => "NotAnEigenvalue",
            Self::InvalidInput(_) => "InvalidInput",
            Self::Model(e) => e.name(),
            Self::Linalg(e) => e.name(),
            Self::Dynamics(e) => e.name(),
            Self::Propagator(e) => e.name(),
        }
    }
}

/// Unweighted least-squares line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Half-open index range of the fitted points.
    pub window: (usize, usize),
    pub residuals: Vec<f64>,
}

pub fn linear_fit(x: &[f64], y: &[f64], min_points: usize) -> Result<FitReport, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::InvalidInput("x and y lengths differ".into()));
    }
    let n = x.len();
    if n < min_points.max(2) {
        return Err(AnalysisError::InsufficientPoints { need: min_points.max(2), got: n });
    }
    let k = n as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(AnalysisError::InvalidInput("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - (intercept + slope * a)).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(FitReport { slope, intercept, r_squared, window: (0, n), residuals })
}

/// Fit of `tau` against the swept parameter over the trailing `window_fraction` of points.
pub fn scaling_fit(sweep: &SweepResult, window_fraction: f64) -> Result<FitReport, AnalysisError> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(AnalysisError::InvalidInput("window fraction must lie in (0, 1]".into()));
    }
    let n = sweep.points.len();
    let count = ((n as f64 * window_fraction).round() as usize).min(n);
    let start = n - count;
    let x: Vec<f64> = sweep.points[start..].iter().map(|p| p.value).collect();
    let y: Vec<f64> = sweep.points[start..].iter().map(|p| p.tau).collect();
    let mut fit = linear_fit(&x, &y, 5)?;
    fit.window = (start, n);
    Ok(fit)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainHalf {
    Left,
    Right,
}

/// Exponential fit of peak heights `heights[j-1]` against `d = L - j` over one half of the chain.
///
/// Bosonic heights must grow with `d`, fermionic ones decay; `xi_est = 1/|slope|`.
pub fn xi_prop_fit(heights: &[f64], half: ChainHalf, statistics: Statistics) -> Result<(FitReport, f64), AnalysisError> {
    let l = heights.len();
    let js: Vec<usize> = match half {
        ChainHalf::Left => (1..=l / 2).collect(),
        ChainHalf::Right => (l / 2 + 1..l).collect(),
    };
    let pts: Vec<(f64, f64)> = js
        .iter()
        .filter(|&&j| heights[j - 1] > 0.0)
        .map(|&j| ((l - j) as f64, heights[j - 1].ln()))
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let fit = linear_fit(&x, &y, 5)?;
    let expected = -statistics.sign();
    if fit.slope * expected <= 0.0 {
        return Err(AnalysisError::WrongSignSlope(fit.slope));
    }
    let xi = 1.0 / fit.slope.abs();
    Ok((fit, xi))
}

/// `max(0, 1 - sqrt(Delta t / L))`.
pub fn small_gamma_curve(l: usize, delta: f64, t_grid: &[f64]) -> Vec<f64> {
    t_grid.iter().map(|&t| (1.0 - (delta * t / l as f64).max(0.0).sqrt()).max(0.0)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthConvention {
    /// `L` counts unit cells.
    Cells,
    /// `L` counts lattice sites.
    Sites,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvecPrediction {
    pub tau: f64,
    pub tau_times_delta: f64,
    pub xi: f64,
    pub length: usize,
    pub convention: LengthConvention,
}

/// `tau_EVec = L / (xi Delta)`; SSH uses `min(xi_1, xi_2)`, NNN the extracted length.
pub fn evec_prediction(spec: &ModelSpec, convention: LengthConvention) -> Result<EvecPrediction, AnalysisError> {
    spec.validate()?;
    let delta = spec.gap();
    let xi = match spec.kind {
        ModelKind::Hn | ModelKind::Ssh => derived_scales(spec)?.xi_loc,
        ModelKind::Nnn => {
            let h = spec.h_eff()?;
            let eig = crate::ndlinalg::eigenvalues(&h)?;
            eig.iter()
                .filter_map(|&e| localization_extract(spec, e).ok())
                .map(|r| r.xi_gbz)
                .fold(f64::INFINITY, f64::min)
        }
    };
    if !xi.is_finite() && xi != f64::INFINITY {
        return Err(AnalysisError::MissingXi);
    }
    let length = match (spec.kind, convention) {
        (ModelKind::Ssh, LengthConvention::Sites) => spec.sites(),
        _ => spec.l,
    };
    let td = length as f64 / xi;
    Ok(EvecPrediction { tau: td / delta, tau_times_delta: td, xi, length, convention })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (1..=8).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        let f = linear_fit(&x, &y, 5).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 3.0).abs() < 1e-12 && f.r_squared == 1.0);
        assert!(matches!(linear_fit(&x[..3], &y[..3], 5), Err(AnalysisError::InsufficientPoints { .. })));
    }

    #[test]
    fn synthetic_heights() {
        let h: Vec<f64> = (1..=30).map(|j| (-((30 - j) as f64) / 7.0).exp()).collect();
        let (_, xi) = xi_prop_fit(&h, ChainHalf::Left, Statistics::Fermion).unwrap();
        assert!((xi - 7.0).abs() < 1e-6);
        assert!(matches!(xi_prop_fit(&h, ChainHalf::Left, Statistics::Boson), Err(AnalysisError::WrongSignSlope(_))));
    }

    #[test]
    fn small_gamma_endpoints() {
        let c = small_gamma_curve(60, 0.5, &[0.0, 120.0, 200.0]);
        assert_eq!(c, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn evec_values() {
        let hn = ModelSpec::hn(Statistics::Boson, 100, 1.0, 0.999, 0.0, 0.2);
        let p = evec_prediction(&hn, LengthConvention::Cells).unwrap();
        assert!((p.tau_times_delta - 380.020).abs() < 1e-3);
        let ssh = ModelSpec::ssh(Statistics::Fermion, 60, 1.0, 0.0, 1.0, 0.999, 0.1);
        let p = evec_prediction(&ssh, LengthConvention::Cells).unwrap();
        assert!((p.tau_times_delta - 414.5).abs() < 0.1);
        let p = evec_prediction(&ssh, LengthConvention::Sites).unwrap();
        assert!((p.tau_times_delta - 829.0).abs() < 0.2);
        let recip = ModelSpec::hn(Statistics::Fermion, 100, 1.0, 0.0, 0.0, 0.2);
        assert_eq!(evec_prediction(&recip, LengthConvention::Cells).unwrap().tau, 0.0);
    }
}
