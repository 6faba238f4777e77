use serde::Serialize;

use super::{DynamicsError, InitialKind};
use crate::models::{ModelSpec, Statistics};
use crate::ndlinalg::{step_size, Banded, Rk4Grid, C64};

pub const DEFAULT_SUSTAIN_FACTOR: f64 = 3.0;
/// Horizon in units of `sites / Delta`.
pub const DEFAULT_HORIZON_FACTOR: f64 = 10.0;
/// Sampling step in units of `1 / Delta`.
pub const DEFAULT_GRID_FACTOR: f64 = 0.05;
/// Largest pump for which uniform bosonic starts are run without a warning.
pub const BOSON_UNIFORM_GAMMA_CAP: f64 = 0.1;
/// Relative size of the neglected tail in the steady-state quadrature.
const TAIL_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingInfo {
    pub method: &'static str,
    pub bracket: (f64, f64),
    pub values: (f64, f64),
    /// Crossings discarded because the curve rose above the threshold again too early.
    pub rejected: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelaxationResult {
    pub tau: f64,
    pub threshold: f64,
    pub sustained: bool,
    pub sustain_factor: f64,
    pub horizon: f64,
    pub crossing: CrossingInfo,
}

/// Online first-sustained-crossing detector fed one `(t, delta_n)` sample at a time.
#[derive(Clone, Debug)]
pub struct RelaxationTracker {
    eta: f64,
    sustain_factor: f64,
    horizon: f64,
    prev: Option<(f64, f64)>,
    candidate: Option<(f64, CrossingInfo)>,
    rejected: usize,
    done: Option<RelaxationResult>,
}

impl RelaxationTracker {
    pub fn new(eta: f64, sustain_factor: f64, horizon: f64) -> Result<Self, DynamicsError> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(DynamicsError::InvalidCurve(format!("eta = {eta} outside (0, 1)")));
        }
        if !(sustain_factor >= 1.0) {
            return Err(DynamicsError::InvalidCurve("sustain factor must be >= 1".into()));
        }
        Ok(Self { eta, sustain_factor, horizon, prev: None, candidate: None, rejected: 0, done: None })
    }

    fn result(&self, tau: f64, crossing: CrossingInfo, sustained: bool) -> RelaxationResult {
        RelaxationResult {
            tau,
            threshold: self.eta,
            sustained,
            sustain_factor: self.sustain_factor,
            horizon: self.horizon,
            crossing,
        }
    }

    /// Returns `false` once a sustained crossing is confirmed.
    pub fn feed(&mut self, t: f64, v: f64) -> Result<bool, DynamicsError> {
        if self.done.is_some() {
            return Ok(false);
        }
        let Some((tp, vp)) = self.prev else {
            if v < self.eta {
                return Err(DynamicsError::InvalidCurve(format!("curve starts below eta ({v})")));
            }
            self.prev = Some((t, v));
            return Ok(true);
        };
        self.prev = Some((t, v));
        if let Some((tau, _)) = &self.candidate {
            if v > self.eta {
                self.candidate = None;
                self.rejected += 1;
            } else if t >= self.sustain_factor * tau {
                let (tau, info) = self.candidate.take().unwrap();
                self.done = Some(self.result(tau, info, true));
                return Ok(false);
            }
            return Ok(true);
        }
        if vp > self.eta && v <= self.eta {
            let tau = tp + (vp - self.eta) / (vp - v) * (t - tp);
            let info = CrossingInfo { method: "linear", bracket: (tp, t), values: (vp, v), rejected: self.rejected };
            if self.sustain_factor * tau <= t {
                self.done = Some(self.result(tau, info, true));
                return Ok(false);
            }
            self.candidate = Some((tau, info));
        }
        Ok(true)
    }

    /// Sustained result, or an unconfirmed crossing flagged `sustained = false`.
    pub fn finish(self) -> Result<RelaxationResult, DynamicsError> {
        if let Some(r) = self.done {
            return Ok(r);
        }
        match self.candidate.clone() {
            Some((tau, mut info)) => {
                info.rejected = self.rejected;
                Ok(self.result(tau, info, false))
            }
            None => Err(DynamicsError::NotRelaxedWithinHorizon(self.horizon)),
        }
    }
}

/// First crossing of `eta` that stays below it until `sustain_factor * tau`.
pub fn relaxation_time(curve: &[f64], t_grid: &[f64], eta: f64, sustain_factor: f64) -> Result<RelaxationResult, DynamicsError> {
    if curve.len() != t_grid.len() || curve.is_empty() {
        return Err(DynamicsError::InvalidCurve("curve and grid lengths differ".into()));
    }
    let mut tr = RelaxationTracker::new(eta, sustain_factor, *t_grid.last().unwrap())?;
    for (&t, &v) in t_grid.iter().zip(curve) {
        if !tr.feed(t, v)? {
            break;
        }
    }
    tr.finish()
}

fn check_site(spec: &ModelSpec, m: usize) -> Result<usize, DynamicsError> {
    let n = spec.sites();
    if m == 0 || m > n {
        return Err(DynamicsError::InvalidSite(m, n));
    }
    Ok(n)
}

/// Row `m` of `G(t)` together with `q = 2 Gamma int_0^t |row|^2`, packed as `[row..., q]`.
struct RowSystem {
    gen: Banded,
    n: usize,
    pump: f64,
    h: f64,
}

impl RowSystem {
    fn new(spec: &ModelSpec) -> Result<Self, DynamicsError> {
        let h = spec.h_eff()?;
        let gen = Banded::from_dense(&h).scaled(C64::new(0.0, -1.0));
        let n = gen.dim();
        let h = step_size(gen.norm_inf());
        Ok(Self { gen, n, pump: 2.0 * spec.gamma, h })
    }

    fn start(&self, m: usize) -> Vec<C64> {
        let mut x = vec![C64::new(0.0, 0.0); self.n + 1];
        x[m - 1] = C64::new(1.0, 0.0);
        x
    }

    fn rhs(&self, x: &[C64], y: &mut [C64]) {
        let n = self.n;
        self.gen.apply_left(&x[..n], &mut y[..n]);
        y[n] = C64::new(self.pump * x[..n].iter().map(|z| z.norm_sqr()).sum::<f64>(), 0.0);
    }

    fn occupation(&self, x: &[C64], c0: &[f64]) -> f64 {
        x[..self.n].iter().zip(c0).map(|(z, c)| c * z.norm_sqr()).sum::<f64>() + x[self.n].re
    }
}

/// Vacuum-start occupation of site `m` (1-based) from a single propagator row.
pub fn vacuum_occupation_fast(spec: &ModelSpec, m: usize, t_grid: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    check_site(spec, m)?;
    let sys = RowSystem::new(spec)?;
    let mut out = Vec::with_capacity(t_grid.len());
    Rk4Grid::new(sys.h).run(sys.start(m), t_grid, |x, y| sys.rhs(x, y), |_, _, x| {
        out.push(x[sys.n].re);
        true
    })?;
    Ok(out)
}

fn quadrature_grid(spec: &ModelSpec) -> (f64, Vec<f64>) {
    let delta = spec.gap();
    let n = spec.sites() as f64;
    let t_min = 2.0 * (n + 10.0) / delta;
    let dt = 1.0 / delta;
    let t_cap = 200.0 * (n + 10.0) / delta;
    let count = (t_cap / dt).ceil() as usize;
    (t_min, (0..=count).map(|k| k as f64 * dt).collect())
}

fn tail_small(norm_sq: f64, q: f64, pump: f64, delta: f64) -> bool {
    pump * norm_sq / (2.0 * delta) <= TAIL_TOL * q
}

/// `n_m(inf) = 2 Gamma int_0^inf |<m| e^{-i H_eff s}|^2 ds`, integrated until the tail is negligible.
pub fn steady_occupation_quadrature(spec: &ModelSpec, m: usize) -> Result<f64, DynamicsError> {
    check_site(spec, m)?;
    if spec.gamma == 0.0 {
        return Ok(0.0);
    }
    let sys = RowSystem::new(spec)?;
    let (t_min, grid) = quadrature_grid(spec);
    let delta = spec.gap();
    let mut value = None;
    Rk4Grid::new(sys.h).run(sys.start(m), &grid, |x, y| sys.rhs(x, y), |_, t, x| {
        let norm_sq: f64 = x[..sys.n].iter().map(|z| z.norm_sqr()).sum();
        if t >= t_min && tail_small(norm_sq, x[sys.n].re, sys.pump, delta) {
            value = Some(x[sys.n].re);
            return false;
        }
        true
    })?;
    value.ok_or(DynamicsError::SteadyStateNotConverged(*grid.last().unwrap()))
}

/// Steady-state diagonal of every site from the full propagator `G(t)`.
pub fn steady_diagonal_quadrature(spec: &ModelSpec) -> Result<Vec<f64>, DynamicsError> {
    let h = spec.h_eff()?;
    let n = h.rows();
    if spec.gamma == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let gen = Banded::from_dense(&h).scaled(C64::new(0.0, -1.0));
    let pump = 2.0 * spec.gamma;
    let mut x0 = vec![C64::new(0.0, 0.0); n * n + n];
    for i in 0..n {
        x0[i * n + i] = C64::new(1.0, 0.0);
    }
    let rhs = |x: &[C64], y: &mut [C64]| {
        let (g, acc) = y.split_at_mut(n * n);
        gen.apply_mat(&x[..n * n], n, g);
        for (i, a) in acc.iter_mut().enumerate() {
            *a = C64::new(pump * x[i * n..(i + 1) * n].iter().map(|z| z.norm_sqr()).sum::<f64>(), 0.0);
        }
    };
    let (t_min, grid) = quadrature_grid(spec);
    let delta = spec.gap();
    let mut value = None;
    Rk4Grid::new(step_size(gen.norm_inf())).run(x0, &grid, rhs, |_, t, x| {
        if t < t_min {
            return true;
        }
        let acc = &x[n * n..];
        let converged = (0..n).all(|i| {
            let row: f64 = x[i * n..(i + 1) * n].iter().map(|z| z.norm_sqr()).sum();
            tail_small(row, acc[i].re, pump, delta)
        });
        if converged {
            value = Some(acc.iter().map(|z| z.re).collect());
        }
        !converged
    })?;
    value.ok_or(DynamicsError::SteadyStateNotConverged(*grid.last().unwrap()))
}

#[derive(Clone, Debug, Serialize)]
pub struct RelaxConfig {
    pub init: InitialKind,
    pub eta: f64,
    pub sustain_factor: f64,
    pub horizon_factor: f64,
    pub grid_factor: f64,
    /// Observed site (1-based); the last site when `None`.
    pub site: Option<usize>,
    pub keep_curve: bool,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        Self {
            init: InitialKind::Vacuum,
            eta: (-1.0f64).exp(),
            sustain_factor: DEFAULT_SUSTAIN_FACTOR,
            horizon_factor: DEFAULT_HORIZON_FACTOR,
            grid_factor: DEFAULT_GRID_FACTOR,
            site: None,
            keep_curve: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RelaxRun {
    pub result: RelaxationResult,
    pub site: usize,
    pub steady_occupation: f64,
    pub delta: f64,
    /// `(t, n, delta_n)` samples up to the stopping time.
    pub curve: Option<Vec<(f64, f64, f64)>>,
    pub warnings: Vec<String>,
}

/// Relaxation time of one site: propagator row plus pump quadrature, stopped at the
/// first sustained crossing.
pub fn relax(spec: &ModelSpec, cfg: &RelaxConfig) -> Result<RelaxRun, DynamicsError> {
    spec.validate()?;
    let n = spec.sites();
    let m = cfg.site.unwrap_or(n);
    check_site(spec, m)?;
    let delta = spec.gap();
    let mut warnings = Vec::new();
    let c0 = match cfg.init {
        InitialKind::Vacuum => vec![0.0; n],
        InitialKind::AllFilled if spec.statistics == Statistics::Boson => return Err(DynamicsError::AllFilledBosons),
        InitialKind::AllFilled => vec![1.0; n],
        InitialKind::UniformSsAvg => {
            if spec.statistics == Statistics::Boson && spec.gamma > BOSON_UNIFORM_GAMMA_CAP {
                warnings.push(format!("bosonic uniform start with Gamma = {} above cap {}", spec.gamma, BOSON_UNIFORM_GAMMA_CAP));
            }
            let diag = steady_diagonal_quadrature(spec)?;
            vec![diag.iter().sum::<f64>() / n as f64; n]
        }
    };
    let steady = steady_occupation_quadrature(spec, m)?;
    if steady <= 0.0 {
        return Err(DynamicsError::ZeroSteadyState);
    }
    let horizon = cfg.horizon_factor * n as f64 / delta;
    let dt = cfg.grid_factor / delta;
    let grid: Vec<f64> = (0..=(horizon / dt).ceil() as usize).map(|k| k as f64 * dt).collect();
    let mut tracker = RelaxationTracker::new(cfg.eta, cfg.sustain_factor, horizon)?;
    let mut curve = cfg.keep_curve.then(Vec::new);
    let mut failure = None;
    let sys = RowSystem::new(spec)?;
    Rk4Grid::new(sys.h).run(sys.start(m), &grid, |x, y| sys.rhs(x, y), |_, t, x| {
        let occ = sys.occupation(x, &c0);
        let dn = (occ - steady).abs() / steady;
        if let Some(c) = curve.as_mut() {
            c.push((t, occ, dn));
        }
        match tracker.feed(t, dn) {
            Ok(go) => go,
            Err(e) => {
                failure = Some(e);
                false
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let result = tracker.finish()?;
    Ok(RelaxRun { result, site: m, steady_occupation: steady, delta, curve, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_curve() {
        let t: Vec<f64> = (0..=400).map(|k| k as f64 * 0.01).collect();
        let c: Vec<f64> = t.iter().map(|t| (-t).exp()).collect();
        let r = relaxation_time(&c, &t, (-1.0f64).exp(), 3.0).unwrap();
        assert!((r.tau - 1.0).abs() < 1e-4 && r.sustained);
    }

    #[test]
    fn sawtooth_rejects_early_dip() {
        let t: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
        let c: Vec<f64> = t.iter().map(|&t| if t < 1.0 { 1.0 } else if t < 1.5 { 0.1 } else if t < 2.0 { 0.9 } else { 0.1 }).collect();
        let r = relaxation_time(&c, &t, 0.5, 3.0).unwrap();
        assert!(r.tau > 1.9 && r.tau < 2.0 && r.crossing.rejected == 1 && r.sustained);
    }

    #[test]
    fn never_relaxes() {
        let t = [0.0, 1.0, 2.0];
        assert!(matches!(relaxation_time(&[1.0, 0.9, 0.8], &t, 0.5, 3.0), Err(DynamicsError::NotRelaxedWithinHorizon(_))));
        assert!(matches!(relaxation_time(&[0.1, 0.9, 0.8], &t, 0.5, 3.0), Err(DynamicsError::InvalidCurve(_))));
    }
}
