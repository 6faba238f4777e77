use serde::Serialize;

use super::{green::p_no_bounce, PropagatorError};
use crate::models::ModelSpec;
use crate::ndlinalg::{Banded, CMatrix, C64};

const SCAN_POINTS: usize = 4000;

/// Peak time, height and widths of `t -> P(L, j; t)` from the no-bounce propagator.
#[derive(Clone, Debug, Serialize)]
pub struct PeakStats {
    pub d: usize,
    pub t_max: f64,
    /// `d / Delta`, exact at perfect non-reciprocity.
    pub t_max_analytic: f64,
    /// Spacing of the scan grid that bracketed the peak.
    pub grid_step: f64,
    pub height: f64,
    pub log_height: f64,
    /// Gaussian width formula `sqrt(d) / Delta`.
    pub sigma: f64,
    /// Half-width of `P` at `height * e^{-1/2}`.
    pub fitted_width: f64,
    /// Half-width of `|G|` at `|G|_max * e^{-1/2}`.
    pub amplitude_width: f64,
    /// From the dominant exponent `ln(2 pi d * height)` between `d` and `d + 1`.
    pub xi_prop_implied: f64,
}

fn peak_of(spec: &ModelSpec, j: usize) -> Result<(f64, f64, f64), PropagatorError> {
    let d = spec.l - j;
    if d == 0 {
        return Err(PropagatorError::FlatPeak);
    }
    let delta = spec.gap();
    let logp = |t: f64| p_no_bounce(spec, j, t).map(|s| s.log_p());
    let horizon = 4.0 * (d as f64 + 1.0) / delta;
    let step = horizon / SCAN_POINTS as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 1..=SCAN_POINTS {
        let v = logp(i as f64 * step)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    if best.0 == SCAN_POINTS || best.0 == 0 || !best.1.is_finite() {
        return Err(PropagatorError::FlatPeak);
    }
    // Golden-section refinement inside the bracketing cells.
    let (mut a, mut b) = ((best.0 - 1) as f64 * step, (best.0 + 1) as f64 * step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut e) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fe) = (logp(c)?, logp(e)?);
    for _ in 0..200 {
        if fc > fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = logp(c)?;
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = logp(e)?;
        }
        if b - a < 1e-13 * b.max(1.0) {
            break;
        }
    }
    let t = 0.5 * (a + b);
    Ok((t, logp(t)?, step))
}

/// Time where `ln P` has dropped by `drop` from the peak, on one side.
fn crossing(spec: &ModelSpec, j: usize, t_peak: f64, target: f64, dir: f64, scale: f64) -> Result<f64, PropagatorError> {
    let logp = |t: f64| p_no_bounce(spec, j, t).map(|s| s.log_p());
    let mut inner = t_peak;
    let mut outer = t_peak;
    let mut stride = 0.05 * scale;
    loop {
        outer += dir * stride;
        if outer <= 0.0 {
            outer = 0.0;
            if logp(outer)? > target {
                return Err(PropagatorError::FlatPeak);
            }
            break;
        }
        if logp(outer)? < target {
            break;
        }
        inner = outer;
        stride *= 1.5;
        if stride > 1e6 * scale {
            return Err(PropagatorError::FlatPeak);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (inner + outer);
        if logp(mid)? >= target {
            inner = mid;
        } else {
            outer = mid;
        }
        if (outer - inner).abs() < 1e-12 * t_peak.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (inner + outer))
}

fn half_width(spec: &ModelSpec, j: usize, t_peak: f64, log_h: f64, drop: f64) -> Result<f64, PropagatorError> {
    let scale = ((spec.l - j) as f64).sqrt() / spec.gap();
    let target = log_h - drop;
    let right = crossing(spec, j, t_peak, target, 1.0, scale)?;
    let left = crossing(spec, j, t_peak, target, -1.0, scale)?;
    Ok(0.5 * (right - left))
}

/// Peak statistics for the propagator from site `j` to the last site `L = spec.l`.
pub fn peak_stats(spec: &ModelSpec, j: usize) -> Result<PeakStats, PropagatorError> {
    super::check_site(j, spec.l)?;
    let d = spec.l - j;
    let (t_max, log_height, grid_step) = peak_of(spec, j)?;
    let next = if j >= 2 { (spec.clone(), j - 1) } else { (spec.with_l(spec.l + 1), j) };
    let (_, log_next, _) = peak_of(&next.0, next.1)?;
    let tau = 2.0 * std::f64::consts::PI;
    let dominant = |dist: usize, lh: f64| lh + (tau * dist as f64).ln();
    let diff = dominant(d + 1, log_next) - dominant(d, log_height);
    let delta = spec.gap();
    Ok(PeakStats {
        d,
        t_max,
        t_max_analytic: d as f64 / delta,
        grid_step,
        height: log_height.exp(),
        log_height,
        sigma: (d as f64).sqrt() / delta,
        fitted_width: half_width(spec, j, t_max, log_height, 0.5)?,
        amplitude_width: half_width(spec, j, t_max, log_height, 1.0)?,
        xi_prop_implied: -spec.statistics.sign() / diff,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalityReport {
    /// Least-squares slope of `ln|G|` against `ln t`.
    pub slope: f64,
    /// `G / (-i t)` at the smallest sampled time.
    pub coefficient: C64,
    /// `|G/t + i H_mj|` at the smallest sampled time.
    pub coefficient_defect: f64,
}

/// Short-time order of `G(m, j; t)` from its Taylor series (sites 1-based).
pub fn locality_order_check(h_eff: &CMatrix, m: usize, j: usize, t_list: &[f64]) -> Result<LocalityReport, PropagatorError> {
    let n = h_eff.require_square()?;
    super::check_site(m, n)?;
    super::check_site(j, n)?;
    if t_list.len() < 2 {
        return Err(PropagatorError::TooFewSamples);
    }
    let gen = Banded::from_dense(h_eff);
    let g_at = |t: f64| -> C64 {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[j - 1] = C64::new(1.0, 0.0);
        let mut w = v.clone();
        let mut acc = v[m - 1];
        let factor = C64::new(0.0, -t);
        for k in 1..200 {
            gen.apply(&v, &mut w);
            for x in w.iter_mut() {
                *x *= factor / k as f64;
            }
            std::mem::swap(&mut v, &mut w);
            acc += v[m - 1];
            let tail = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if k > m.abs_diff(j) && tail <= 1e-18 * acc.norm() {
                break;
            }
        }
        acc
    };
    let samples: Vec<(f64, C64)> = t_list.iter().map(|&t| (t, g_at(t))).collect();
    let usable: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, g)| g.norm() > 1e-300)
        .map(|(t, g)| (t.ln(), g.norm().ln()))
        .collect();
    if usable.len() < 2 {
        return Err(PropagatorError::Underflow);
    }
    let k = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / k;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let (t0, g0) = samples.iter().copied().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
    let hmj = h_eff[(m - 1, j - 1)];
    Ok(LocalityReport {
        slope: sxy / sxx,
        coefficient: g0 / C64::new(0.0, -t0),
        coefficient_defect: (g0 / t0 + C64::new(0.0, 1.0) * hmj).norm(),
    })
}
