use nhrelax::analysis::{run_sweep, tau_sat, SweepAxis, PLATEAU_L};
use nhrelax::cli::parse_values;
use nhrelax::dynamics::RelaxConfig;
use nhrelax::{ModelSpec, Statistics};
use proptest::prelude::*;

#[test]
fn sweep_sorted_and_deterministic() {
    let base = ModelSpec::hn(Statistics::Boson, 20, 1.0, 0.999, 0.0, 0.2);
    let cfg = RelaxConfig::default();
    let values = [60.0, 20.0, 40.0];
    let par = run_sweep(&base, SweepAxis::L, &values, &cfg, true).unwrap();
    let ser = run_sweep(&base, SweepAxis::L, &values, &cfg, false).unwrap();
    let ls: Vec<f64> = par.points.iter().map(|p| p.value).collect();
    assert_eq!(ls, [20.0, 40.0, 60.0]);
    for (a, b) in par.points.iter().zip(&ser.points) {
        assert_eq!(a.tau.to_bits(), b.tau.to_bits());
    }
    assert!(par.points.windows(2).all(|w| w[1].tau > w[0].tau));
}

#[test]
fn fermion_plateau() {
    let base = ModelSpec::hn(Statistics::Fermion, 40, 1.0, 0.999, 0.0, 0.5);
    let (l, v) = tau_sat(&base, &RelaxConfig::default()).unwrap();
    assert!(PLATEAU_L.contains(&l));
    assert!(v > 0.0 && v < 40.0, "{v}");
}

#[test]
fn axis_rejects_fractional_length() {
    let base = ModelSpec::hn(Statistics::Fermion, 20, 1.0, 0.5, 0.0, 0.2);
    assert!(SweepAxis::L.apply(&base, 20.5).is_err());
    assert_eq!(SweepAxis::Kappa.apply(&base, 0.7).unwrap().kappa, 0.7);
}

proptest! {
    #[test]
    fn inclusive_ranges(start in 0i32..50, n in 0usize..40, step in 1i32..8) {
        let end = start + step * n as i32;
        let v = parse_values(&format!("{start}:{end}:{step}")).unwrap();
        prop_assert_eq!(v.len(), n + 1);
        prop_assert_eq!(v[0], start as f64);
        prop_assert!((v[n] - end as f64).abs() < 1e-9);
    }
}
