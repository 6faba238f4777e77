use nhrelax::analysis::propagation_heights;
use nhrelax::cli::verify;
use nhrelax::ndlinalg::{LogComplex, C64};
use nhrelax::propagator::{locality_order_check, p_simplified, peak_stats};
use nhrelax::{ModelSpec, Statistics};
use proptest::prelude::*;

fn hn(stats: Statistics, l: usize, kappa: f64, gamma: f64) -> ModelSpec {
    ModelSpec::hn(stats, l, 1.0, kappa, 0.0, gamma)
}

#[test]
fn route_agreement() {
    for check in [verify::check_route_bounce(), verify::check_route_spectral(), verify::check_route_no_bounce()] {
        assert!(check.passed, "{} = {:e}", check.name, check.value);
    }
}

#[test]
fn simplified_peak_time() {
    let spec = hn(Statistics::Fermion, 100, 1.0, 0.05);
    let delta = spec.gap();
    for d in [1usize, 10, 99] {
        let j = spec.l - d;
        let t_star = d as f64 / delta;
        let step = 1e-3 * t_star;
        let at = |t: f64| p_simplified(&spec, j, t).unwrap().log_p();
        assert!(at(t_star) > at(t_star - step));
        assert!(at(t_star) > at(t_star + step));
    }
}

#[test]
fn locality_nearest_neighbour() {
    let spec = hn(Statistics::Fermion, 12, 0.6, 0.1);
    let h = spec.h_eff().unwrap();
    let r = locality_order_check(&h, 6, 5, &[1e-4, 2e-4, 4e-4]).unwrap();
    assert!((r.slope - 1.0).abs() < 0.01);
    let expected = 0.5 * (spec.w + spec.kappa);
    assert!((r.coefficient.norm() - expected).abs() < 0.01 * expected);
    let r3 = locality_order_check(&h, 8, 5, &[1e-3, 2e-3, 4e-3]).unwrap();
    assert!((r3.slope - 3.0).abs() < 0.05);
}

#[test]
fn implied_propagation_length() {
    let p = peak_stats(&hn(Statistics::Fermion, 60, 1.0, 0.05), 30).unwrap();
    assert!((p.xi_prop_implied - 10.25).abs() < 0.5, "{}", p.xi_prop_implied);
    assert!((p.t_max - p.t_max_analytic).abs() <= p.grid_step);
}

#[test]
fn heights_follow_statistics() {
    for (stats, grows) in [(Statistics::Boson, true), (Statistics::Fermion, false)] {
        let spec = hn(stats, 30, 0.999, 0.05);
        let h = propagation_heights(&spec.h_eff().unwrap(), 30, spec.gap(), 0.05).unwrap();
        let (near, far) = (h[30 - 5 - 1], h[30 - 20 - 1]);
        assert_eq!(far > near, grows, "{stats:?}: d=5 {near}, d=20 {far}");
    }
}

proptest! {
    #[test]
    fn log_complex_round_trip(re in -1e3f64..1e3, im in -1e3f64..1e3) {
        prop_assume!(re.hypot(im) > 1e-9);
        let z = C64::new(re, im);
        let back = LogComplex::from_complex(z).to_complex();
        prop_assert!((back - z).norm() <= 1e-12 * z.norm());
    }

    #[test]
    fn log_complex_sum_and_product(a in -50f64..50.0, pa in -3f64..3.0, b in -50f64..50.0, pb in -3f64..3.0) {
        let (x, y) = (LogComplex::new(a / 10.0, pa), LogComplex::new(b / 10.0, pb));
        let (zx, zy) = (x.to_complex(), y.to_complex());
        let scale = zx.norm().max(zy.norm());
        prop_assert!(((x + y).to_complex() - (zx + zy)).norm() <= 1e-12 * scale);
        prop_assert!(((x * y).to_complex() - zx * zy).norm() <= 1e-12 * zx.norm() * zy.norm());
    }
}
