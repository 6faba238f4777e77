use nhrelax::dynamics::{evolve_covariance, initial_state, EvolveOptions, InitialKind};
use nhrelax::oracle::{build_fock_lindblad, lindblad_brute, third_quantization_check, FockState};
use nhrelax::{ModelSpec, Statistics};

fn compare(spec: &ModelSpec, start: FockState, grid: &[f64]) -> f64 {
    let fl = build_fock_lindblad(spec, start).unwrap();
    let exact = lindblad_brute(&fl, grid).unwrap();
    let kind = if start == FockState::Vacuum { InitialKind::Vacuum } else { InitialKind::AllFilled };
    let s0 = initial_state(kind, spec).unwrap();
    let traj = evolve_covariance(spec, &s0, grid, EvolveOptions::default()).unwrap();
    let mut worst = 0.0f64;
    for (k, row) in exact.iter().enumerate() {
        for (m, v) in row.iter().enumerate() {
            worst = worst.max((v - traj.occupations[m][k]).abs());
        }
    }
    worst
}

#[test]
fn two_site_covariance_matches_master_equation() {
    let s = ModelSpec::hn(Statistics::Fermion, 2, 1.0, 0.5, 0.0, 0.1);
    let err = compare(&s, FockState::Vacuum, &[0.0, 0.5, 1.0, 2.0, 5.0]);
    assert!(err < 1e-8, "{err}");
}

#[test]
fn third_quantization_two_sites() {
    let s = ModelSpec::hn(Statistics::Fermion, 2, 1.0, 0.5, 0.0, 0.1);
    let r = third_quantization_check(&s).unwrap();
    println!("{r:?}");
    assert!(r.passed);
}
