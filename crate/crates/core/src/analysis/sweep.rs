use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{linear_fit, AnalysisError, FitReport};
use crate::dynamics::{relax, RelaxConfig, RelaxRun};
use crate::models::{xi_prop, ModelSpec, Statistics};

/// Chain lengths probed when looking for a fermionic plateau.
pub const PLATEAU_L: [usize; 8] = [40, 60, 80, 100, 120, 140, 160, 180];
pub const DEFAULT_SATURATION_GAMMAS: [f64; 6] = [0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
const PLATEAU_RTOL: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepAxis {
    L,
    #[serde(rename = "kappa")]
    Kappa,
    #[serde(rename = "Gamma")]
    Gamma,
    #[serde(rename = "lambda")]
    Lambda,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            Self::L => "L",
            Self::Kappa => "kappa",
            Self::Gamma => "Gamma",
            Self::Lambda => "lambda",
        }
    }

    pub fn apply(self, base: &ModelSpec, value: f64) -> Result<ModelSpec, AnalysisError> {
        let mut s = base.clone();
        match self {
            Self::L => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(AnalysisError::InvalidInput(format!("L = {value} is not a positive integer")));
                }
                s.l = value as usize;
            }
            Self::Kappa => s.kappa = value,
            Self::Gamma => s.gamma = value,
            Self::Lambda => s.lambda_loss = value,
        }
        s.validate()?;
        Ok(s)
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "L" | "l" => Ok(Self::L),
            "kappa" => Ok(Self::Kappa),
            "Gamma" | "gamma" => Ok(Self::Gamma),
            "lambda" => Ok(Self::Lambda),
            other => Err(format!("unknown sweep axis '{other}'")),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub tau: f64,
    pub tau_times_delta: f64,
    pub spec: ModelSpec,
    pub run: RelaxRun,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
    pub spec_base: ModelSpec,
}

/// One relaxation run per value, sorted by value; tuples run in parallel when asked.
pub fn run_sweep(
    base: &ModelSpec,
    axis: SweepAxis,
    values: &[f64],
    cfg: &RelaxConfig,
    parallel: bool,
) -> Result<SweepResult, AnalysisError> {
    let one = |&v: &f64| -> Result<SweepPoint, AnalysisError> {
        let spec = axis.apply(base, v)?;
        let run = relax(&spec, cfg)?;
        if !run.result.sustained {
            return Err(crate::dynamics::DynamicsError::NotRelaxedWithinHorizon(run.result.horizon).into());
        }
        Ok(SweepPoint { value: v, tau: run.result.tau, tau_times_delta: run.result.tau * run.delta, spec, run })
    };
    let mut points: Vec<SweepPoint> = if parallel {
        values.par_iter().map(one).collect::<Result<_, _>>()?
    } else {
        values.iter().map(one).collect::<Result<_, _>>()?
    };
    points.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(SweepResult { axis, points, spec_base: base.clone() })
}

/// Plateau value of `tau * Delta` over [`PLATEAU_L`]: the last three lengths agree within 1%.
pub fn tau_sat(base: &ModelSpec, cfg: &RelaxConfig) -> Result<(usize, f64), AnalysisError> {
    let mut seen: Vec<f64> = Vec::new();
    for &l in &PLATEAU_L {
        let run = relax(&base.with_l(l), cfg)?;
        if !run.result.sustained {
            return Err(crate::dynamics::DynamicsError::NotRelaxedWithinHorizon(run.result.horizon).into());
        }
        seen.push(run.result.tau * run.delta);
        if let [.., a, b, c] = seen[..] {
            let (lo, hi) = (a.min(b).min(c), a.max(b).max(c));
            if (hi - lo) <= PLATEAU_RTOL * hi {
                return Ok((l, c));
            }
        }
    }
    Err(AnalysisError::NoPlateau(*PLATEAU_L.last().unwrap()))
}

#[derive(Clone, Debug, Serialize)]
pub struct SaturationPoint {
    pub gamma: f64,
    pub xi_prop: f64,
    pub tau_sat_times_delta: f64,
    pub plateau_l: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SaturationReport {
    pub eta: f64,
    pub fit: FitReport,
    pub points: Vec<SaturationPoint>,
    pub dropped: Vec<f64>,
}

/// Fermionic plateau `tau_sat * Delta_f` against `xi_prop^f` across pump strengths.
pub fn saturation_study(gammas: &[f64], base: &ModelSpec, eta: f64, parallel: bool) -> Result<SaturationReport, AnalysisError> {
    if base.statistics != Statistics::Fermion {
        return Err(AnalysisError::InvalidInput("saturation study needs fermions".into()));
    }
    let cfg = RelaxConfig { eta, ..RelaxConfig::default() };
    let one = |&g: &f64| -> Result<(f64, Option<SaturationPoint>), AnalysisError> {
        let spec = SweepAxis::Gamma.apply(base, g)?;
        match tau_sat(&spec, &cfg) {
            Ok((plateau_l, v)) => Ok((
                g,
                Some(SaturationPoint { gamma: g, xi_prop: xi_prop(spec.w, g, Statistics::Fermion), tau_sat_times_delta: v, plateau_l }),
            )),
            Err(AnalysisError::NoPlateau(_)) => Ok((g, None)),
            Err(e) => Err(e),
        }
    };
    let results: Vec<(f64, Option<SaturationPoint>)> = if parallel {
        gammas.par_iter().map(one).collect::<Result<_, _>>()?
    } else {
        gammas.iter().map(one).collect::<Result<_, _>>()?
    };
    let dropped: Vec<f64> = results.iter().filter(|r| r.1.is_none()).map(|r| r.0).collect();
    let mut points: Vec<SaturationPoint> = results.into_iter().filter_map(|r| r.1).collect();
    points.sort_by(|a, b| a.xi_prop.total_cmp(&b.xi_prop));
    let x: Vec<f64> = points.iter().map(|p| p.xi_prop).collect();
    let y: Vec<f64> = points.iter().map(|p| p.tau_sat_times_delta).collect();
    let fit = linear_fit(&x, &y, 2)?;
    Ok(SaturationReport { eta, fit, points, dropped })
}
