use nhrelax::dynamics::{
    delta_n_curve, evolve_covariance, initial_state, relax, steady_diagonal_quadrature, steady_occupation_quadrature,
    vacuum_occupation_fast, EvolveOptions, InitialKind, RelaxConfig,
};
use nhrelax::ndlinalg::solve_steady_sylvester;
use nhrelax::oracle::{build_fock_lindblad, lindblad_brute, FockState};
use nhrelax::{ModelSpec, Statistics};

fn grid(t_end: f64, k: usize) -> Vec<f64> {
    (0..=k).map(|i| t_end * i as f64 / k as f64).collect()
}

#[test]
fn single_site_closed_form() {
    let s = ModelSpec::hn(Statistics::Fermion, 1, 1.0, 0.0, 1.0, 0.05);
    let delta = s.gap();
    let g = grid(10.0, 20);
    let fast = vacuum_occupation_fast(&s, 1, &g).unwrap();
    let exact = lindblad_brute(&build_fock_lindblad(&s, FockState::Vacuum).unwrap(), &g).unwrap();
    for (k, t) in g.iter().enumerate() {
        let closed = s.gamma / delta * (1.0 - (-2.0 * delta * t).exp());
        assert!((fast[k] - closed).abs() < 1e-10);
        assert!((exact[k][0] - closed).abs() < 1e-9);
    }
    let ss = solve_steady_sylvester(&s.h_eff().unwrap(), 2.0 * s.gamma).unwrap();
    assert!((ss[(0, 0)].re - s.gamma / delta).abs() < 1e-12);
}

#[test]
fn fast_row_route_matches_covariance() {
    for stat in [Statistics::Fermion, Statistics::Boson] {
        let s = ModelSpec::hn(stat, 12, 1.0, 0.9, 0.0, 0.2);
        let g = grid(30.0, 60);
        let traj = evolve_covariance(&s, &initial_state(InitialKind::Vacuum, &s).unwrap(), &g, EvolveOptions::default()).unwrap();
        for m in [1, 6, 12] {
            let fast = vacuum_occupation_fast(&s, m, &g).unwrap();
            for (a, b) in fast.iter().zip(&traj.occupations[m - 1]).skip(1) {
                assert!((a - b).abs() <= 1e-6 * b.abs(), "{stat:?} m={m}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn steady_routes_agree() {
    let s = ModelSpec::hn(Statistics::Boson, 20, 1.0, 0.999, 0.0, 0.05);
    let syl = solve_steady_sylvester(&s.h_eff().unwrap(), 2.0 * s.gamma).unwrap();
    let quad = steady_diagonal_quadrature(&s).unwrap();
    let t_end = 50.0 / s.gap();
    let traj = evolve_covariance(&s, &initial_state(InitialKind::Vacuum, &s).unwrap(), &[0.0, t_end], EvolveOptions::default()).unwrap();
    for m in 0..20 {
        let want = syl[(m, m)].re;
        assert!((quad[m] - want).abs() <= 1e-6 * want, "site {m}");
        assert!((traj.occupations[m][1] - want).abs() <= 1e-6 * want, "site {m}");
    }
    let last = steady_occupation_quadrature(&s, 20).unwrap();
    assert!((last - syl[(19, 19)].re).abs() <= 1e-9 * last);
    let uni = initial_state(InitialKind::UniformSsAvg, &s).unwrap();
    let mean = (0..20).map(|m| syl[(m, m)].re).sum::<f64>() / 20.0;
    assert!((uni[(3, 3)].re - mean).abs() < 1e-12 * mean);
}

#[test]
fn filled_start_approaches_from_above() {
    let s = ModelSpec::hn(Statistics::Fermion, 8, 1.0, 0.9, 0.0, 0.2);
    let g = grid(40.0, 200);
    let traj = evolve_covariance(&s, &initial_state(InitialKind::AllFilled, &s).unwrap(), &g, EvolveOptions::default()).unwrap();
    let ss = solve_steady_sylvester(&s.h_eff().unwrap(), 0.4).unwrap();
    for m in 0..8 {
        assert!(traj.occupations[m].iter().all(|&n| n >= ss[(m, m)].re - 1e-8));
    }
}

#[test]
fn vacuum_start_is_monotone() {
    for stat in [Statistics::Fermion, Statistics::Boson] {
        let s = ModelSpec::hn(stat, 10, 1.0, 0.999, 0.0, 0.05);
        let g = grid(300.0, 600);
        let traj = evolve_covariance(&s, &initial_state(InitialKind::Vacuum, &s).unwrap(), &g, EvolveOptions::default()).unwrap();
        for occ in &traj.occupations {
            assert!(occ.windows(2).all(|w| w[1] >= w[0] - 1e-10));
        }
        let dn = delta_n_curve(&traj, 10).unwrap();
        assert_eq!(dn[0], 1.0);
    }
}

#[test]
fn boson_relaxation_time_scales_with_length() {
    let s = ModelSpec::hn(Statistics::Boson, 100, 1.0, 0.999, 0.0, 0.2);
    let run = relax(&s, &RelaxConfig::default()).unwrap();
    let x = run.result.tau * run.delta / 100.0;
    assert!(run.result.sustained && (0.9..=1.1).contains(&x), "{x}");
}
