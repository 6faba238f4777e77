//! Single-particle propagator `G(m, j; t) = <m| exp(-i H_eff t) |j>` and `P = |G|^2`.
//!
//! Routes: direct time stepping, spectral sum over a biorthogonal eigenbasis, the
//! infinite-chain closed form ("no bounce"), its method-of-images completion
//! ("bounce sum") and the lowest-order-in-`J` closed form ("simplified").
//! Sites are 1-based in this module's public API.

mod green;
mod peak;

pub use green::{
    g_infinity, g_infinity_bessel, g_obc_bounce, log_g_no_bounce, p_no_bounce, p_simplified, BounceSum,
    BOUNCE_CAP,
};
pub use peak::{locality_order_check, peak_stats, LocalityReport, PeakStats};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::ModelError;
use crate::ndlinalg::{step_size, Banded, CMatrix, LinalgError, LogComplex, Rk4Grid, Spectrum, C64};

/// Above this `max_a ln(|psi_r| |psi_l|)` the spectral sum cannot resolve its own result.
pub const CANCELLATION_GUARD: f64 = 25.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Direct,
    Spectral,
    NoBounce,
    BounceSum,
    Simplified,
}

impl Route {
    pub fn label(self) -> &'static str {
        match self {
            Self::Direct => "direct",
            Self::Spectral => "spectral",
            Self::NoBounce => "no_bounce",
            Self::BounceSum => "bounce_sum",
            Self::Simplified => "simplified",
        }
    }
}

impl std::str::FromStr for Route {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [Self::Direct, Self::Spectral, Self::NoBounce, Self::BounceSum, Self::Simplified]
            .into_iter()
            .find(|r| r.label() == s)
            .ok_or_else(|| format!("unknown route '{s}'"))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PropagatorSample {
    pub m: usize,
    pub j: usize,
    pub t: f64,
    pub g: LogComplex,
    pub route: Route,
}

impl PropagatorSample {
    pub fn log_p(&self) -> f64 {
        2.0 * self.g.log_mag
    }
    pub fn p(&self) -> f64 {
        self.log_p().exp()
    }
    pub fn g_complex(&self) -> C64 {
        self.g.to_complex()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagatorError {
    #[error("site index {0} outside 1..={1}")]
    InvalidSite(usize, usize),
    #[error("spectral sum refused: log condition {0:.1} exceeds the cancellation guard")]
    CancellationGuard(f64),
    #[error("bounce expansion did not converge within the cutoff")]
    BounceNonConvergence,
    #[error("peak search could not bracket a maximum")]
    FlatPeak,
    #[error("|G| underflows at every sampled time")]
    Underflow,
    #[error("need at least two sample times")]
    TooFewSamples,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl PropagatorError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::InvalidSite(..) => "InvalidSite",
            Self::CancellationGuard(_) => "CancellationGuard",
            Self::BounceNonConvergence => "BounceNonConvergence",
            Self::FlatPeak => "FlatPeak",
            Self::Underflow => "Underflow",
            Self::TooFewSamples => "TooFewSamples",
            Self::Model(e) => e.name(),
            Self::Linalg(e) => e.name(),
        }
    }
}

fn check_site(s: usize, n: usize) -> Result<(), PropagatorError> {
    if s == 0 || s > n {
        Err(PropagatorError::InvalidSite(s, n))
    } else {
        Ok(())
    }
}

/// Column `j` of `G(t)` by RK4 on `dpsi/dt = -i H_eff psi`; samples ordered by time, then `m`.
pub fn propagate_direct(h_eff: &CMatrix, j: usize, t_grid: &[f64]) -> Result<Vec<PropagatorSample>, PropagatorError> {
    let n = h_eff.require_square()?;
    check_site(j, n)?;
    let gen = Banded::from_dense(h_eff).scaled(C64::new(0.0, -1.0));
    let mut x0 = vec![C64::new(0.0, 0.0); n];
    x0[j - 1] = C64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(n * t_grid.len());
    Rk4Grid::new(step_size(gen.norm_inf())).run(
        x0,
        t_grid,
        |x, y| gen.apply(x, y),
        |_, t, x| {
            out.extend(x.iter().enumerate().map(|(m, &g)| PropagatorSample {
                m: m + 1,
                j,
                t,
                g: LogComplex::from_complex(g),
                route: Route::Direct,
            }));
            true
        },
    )?;
    Ok(out)
}

/// Individual spectral terms `psi_r_m(a) conj(psi_l_j(a)) e^{-i E_a t}` in log form.
pub fn spectral_terms(spec: &Spectrum, m: usize, j: usize, t: f64) -> Result<Vec<LogComplex>, PropagatorError> {
    let n = spec.dim();
    check_site(m, n)?;
    check_site(j, n)?;
    Ok((0..n)
        .map(|a| {
            let e = spec.eigenvalues[a];
            let phase = LogComplex::new(e.im * t, -e.re * t);
            spec.right.entry(m - 1, a) * spec.left.entry(j - 1, a).conj() * phase
        })
        .collect())
}

/// Full spectral sum; refused when the eigenbasis is too non-normal to resolve it.
pub fn propagate_spectral(spec: &Spectrum, m: usize, j: usize, t: f64) -> Result<PropagatorSample, PropagatorError> {
    let cond = spec.log_condition();
    if cond > CANCELLATION_GUARD {
        return Err(PropagatorError::CancellationGuard(cond));
    }
    let g = LogComplex::sum(spectral_terms(spec, m, j, t)?);
    Ok(PropagatorSample { m, j, t, g, route: Route::Spectral })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_hn, hn_spectral_analytic, ModelSpec, Statistics};

    #[test]
    fn spectral_completeness_and_guard() {
        let s = ModelSpec::hn(Statistics::Fermion, 9, 1.0, 0.6, 0.0, 0.1);
        let sp = hn_spectral_analytic(&s).unwrap();
        for m in 1..=9 {
            for j in 1..=9 {
                let g = propagate_spectral(&sp, m, j, 0.0).unwrap().g_complex();
                let want = if m == j { 1.0 } else { 0.0 };
                assert!((g - C64::new(want, 0.0)).norm() < 1e-10);
            }
        }
        let big = ModelSpec::hn(Statistics::Fermion, 100, 1.0, 0.999, 0.0, 0.05);
        let sp = hn_spectral_analytic(&big).unwrap();
        assert!(matches!(propagate_spectral(&sp, 100, 1, 1.0), Err(PropagatorError::CancellationGuard(_))));
    }

    #[test]
    fn direct_starts_at_delta() {
        let s = ModelSpec::hn(Statistics::Boson, 5, 1.0, 0.5, 0.0, 0.1);
        let (h, _) = build_hn(&s).unwrap();
        let out = propagate_direct(&h, 3, &[0.0, 0.5]).unwrap();
        for smp in out.iter().filter(|s| s.t == 0.0) {
            assert_eq!(smp.p(), if smp.m == 3 { 1.0 } else { 0.0 });
        }
    }
}
