use std::f64::consts::{FRAC_PI_2, PI};

use super::{check_site, PropagatorError, PropagatorSample, Route};
use crate::models::{hn_xi_loc, ModelKind, ModelError, ModelSpec};
use crate::ndlinalg::special::{bessel_j_log, bessel_series_sum, ln_factorial};
use crate::ndlinalg::{LogComplex, C64};

pub const BOUNCE_CAP: usize = 64;

/// Infinite-chain amplitude `int dk/2pi e^{ikd} e^{-iJt cos k}` by periodic trapezoid rule.
pub fn g_infinity(d: i64, j: f64, t: f64) -> C64 {
    let jt = j * t;
    let nk = 64usize.max(4 * jt.ceil() as usize + 4 * d.unsigned_abs() as usize);
    let sum: C64 = (0..nk)
        .map(|k| {
            let theta = -PI + 2.0 * PI * k as f64 / nk as f64;
            C64::from_polar(1.0, theta * d as f64 - jt * theta.cos())
        })
        .sum();
    sum / nk as f64
}

/// `(-i)^{|d|} J_{|d|}(J t)` in log form.
pub fn g_infinity_bessel(d: i64, j: f64, t: f64) -> LogComplex {
    let n = d.unsigned_abs() as u32;
    let (l, s) = bessel_j_log(n, j * t);
    if s == 0.0 {
        return LogComplex::ZERO;
    }
    let sign_phase = if s < 0.0 { PI } else { 0.0 };
    LogComplex::new(l, sign_phase - FRAC_PI_2 * n as f64)
}

fn require_hn(spec: &ModelSpec) -> Result<(), PropagatorError> {
    if spec.kind != ModelKind::Hn {
        return Err(ModelError::WrongModel("HN").into());
    }
    spec.validate()?;
    Ok(())
}

/// `ln G_inf(m, j; t)` including the gauge factor and damping, with `J e^{1/xi} = w + kappa`
/// applied analytically so the `kappa -> w` limit stays finite.
pub fn log_g_no_bounce(spec: &ModelSpec, m: usize, j: usize, t: f64) -> LogComplex {
    let d = m as i64 - j as i64;
    let damping = -spec.gap() * t;
    let jhop = ((spec.w + spec.kappa) * (spec.w - spec.kappa)).max(0.0).sqrt();
    let x = jhop * t;
    let n = d.unsigned_abs() as u32;
    let phase = -FRAC_PI_2 * n as f64;
    if n == 0 {
        let (l, s) = bessel_j_log(0, x);
        return LogComplex::new(l + damping, if s < 0.0 { PI } else { 0.0 });
    }
    // Forward distance pairs J^d with e^{d/xi} (giving (w+kappa)^d), backward with e^{-d/xi}.
    let hop = if d > 0 { spec.w + spec.kappa } else { spec.w - spec.kappa };
    if x * x <= 2.0 * (n as f64 + 1.0) {
        if t == 0.0 || hop == 0.0 {
            return LogComplex::ZERO;
        }
        let (ls, s) = bessel_series_sum(n, x);
        let l = n as f64 * (0.5 * hop * t).ln() - ln_factorial(n as u64) + ls + damping;
        return LogComplex::new(l, phase + if s < 0.0 { PI } else { 0.0 });
    }
    let inv_xi = 1.0 / hn_xi_loc(spec.w, spec.kappa);
    let (l, s) = bessel_j_log(n, x);
    LogComplex::new(l + d as f64 * inv_xi + damping, phase + if s < 0.0 { PI } else { 0.0 })
}

/// No-bounce estimate of `P(L, j; t)` for the chain length `spec.l`.
pub fn p_no_bounce(spec: &ModelSpec, j: usize, t: f64) -> Result<PropagatorSample, PropagatorError> {
    require_hn(spec)?;
    check_site(j, spec.l)?;
    let m = spec.l;
    let route = if spec.kappa == spec.w { Route::Simplified } else { Route::NoBounce };
    Ok(PropagatorSample { m, j, t, g: log_g_no_bounce(spec, m, j, t), route })
}

/// Lowest order in `J`: `P = ((w+kappa) t / 2)^{2d} e^{-2 Delta t} / (d!)^2`, `d = L - j`.
pub fn p_simplified(spec: &ModelSpec, j: usize, t: f64) -> Result<PropagatorSample, PropagatorError> {
    require_hn(spec)?;
    check_site(j, spec.l)?;
    let d = (spec.l - j) as u64;
    let damping = -spec.gap() * t;
    let log_g = if d == 0 {
        damping
    } else if t == 0.0 {
        f64::NEG_INFINITY
    } else {
        d as f64 * (0.5 * (spec.w + spec.kappa) * t).ln() - ln_factorial(d) + damping
    };
    Ok(PropagatorSample {
        m: spec.l,
        j,
        t,
        g: LogComplex::new(log_g, -FRAC_PI_2 * d as f64),
        route: Route::Simplified,
    })
}

/// Open-chain amplitude via images at `m - j + 2(L+1)b` (direct) and `m + j + 2(L+1)b` (reflected).
#[derive(Clone, Debug)]
pub struct BounceSum {
    pub value: PropagatorSample,
    pub cutoff: usize,
    /// `ln` of the largest `|b| >= 1` contribution relative to the `b = 0` pair.
    pub log_relative_correction: f64,
}

pub fn g_obc_bounce(m: usize, j: usize, t: f64, spec: &ModelSpec, b_start: usize) -> Result<BounceSum, PropagatorError> {
    require_hn(spec)?;
    check_site(m, spec.l)?;
    check_site(j, spec.l)?;
    let jhop = ((spec.w + spec.kappa) * (spec.w - spec.kappa)).sqrt();
    let period = 2 * (spec.l as i64 + 1);
    let (mi, ji) = (m as i64, j as i64);
    let pair = |b: i64| -> LogComplex {
        g_infinity_bessel(mi - ji + period * b, jhop, t) - g_infinity_bessel(mi + ji + period * b, jhop, t)
    };
    let zeroth = pair(0);
    let mut terms = vec![zeroth];
    let mut corr = f64::NEG_INFINITY;
    for b in 1..=b_start.min(BOUNCE_CAP) as i64 {
        let add = pair(b) + pair(-b);
        corr = corr.max(add.log_mag - zeroth.log_mag);
        terms.push(add);
    }
    let mut cutoff = b_start.min(BOUNCE_CAP);
    let mut total = LogComplex::sum(terms.iter().copied());
    loop {
        let b = cutoff as i64 + 1;
        if b as usize > BOUNCE_CAP {
            return Err(PropagatorError::BounceNonConvergence);
        }
        let add = pair(b) + pair(-b);
        corr = corr.max(add.log_mag - zeroth.log_mag);
        total = total + add;
        cutoff += 1;
        if add.is_zero() || add.log_mag < total.log_mag + (1e-16f64).ln() {
            break;
        }
    }
    let gauge = (mi - ji) as f64 / hn_xi_loc(spec.w, spec.kappa) - spec.gap() * t;
    Ok(BounceSum {
        value: PropagatorSample { m, j, t, g: total.scale_exp(gauge), route: Route::BounceSum },
        cutoff,
        log_relative_correction: corr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Statistics;

    #[test]
    fn trivial_values() {
        assert!((g_infinity(0, 1.0, 0.0) - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(g_infinity(3, 0.0, 5.0).norm() < 1e-15);
        assert!((g_infinity(0, 0.0, 5.0) - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn quadrature_matches_bessel() {
        for d in [-7i64, 0, 1, 2, 13, 60] {
            for jt in [0.1, 1.0, 7.3, 31.0, 50.0] {
                let q = g_infinity(d, 1.0, jt);
                let b = g_infinity_bessel(d, 1.0, jt).to_complex();
                assert!((q - b).norm() < 1e-12, "d={d} jt={jt}: {q} vs {b}");
            }
        }
        let g = g_infinity(1, 0.0447102, 10.0);
        assert!(g.re.abs() < 1e-15 && (g.im + 0.218_011_347_218_234).abs() < 1e-12);
    }

    #[test]
    fn simplified_at_exact_nonreciprocity() {
        let s = ModelSpec::hn(Statistics::Fermion, 40, 1.0, 1.0, 0.0, 0.05);
        for (j, t) in [(10, 3.0), (39, 0.5), (1, 40.0)] {
            let a = p_no_bounce(&s, j, t).unwrap().log_p();
            let b = p_simplified(&s, j, t).unwrap().log_p();
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(p_simplified(&s, 40, 0.0).unwrap().p(), 1.0);
    }
}
