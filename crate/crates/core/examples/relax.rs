//! Relaxation time of the last site for bosons and fermions from the vacuum.
use nhrelax::dynamics::{relax, RelaxConfig};
use nhrelax::{ModelSpec, Statistics};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RelaxConfig { keep_curve: true, ..RelaxConfig::default() };
    for stats in [Statistics::Boson, Statistics::Fermion] {
        let spec = ModelSpec::hn(stats, 60, 1.0, 0.999, 0.0, 0.2);
        let run = relax(&spec, &cfg)?;
        println!(
            "{:?}: n_ss = {:.5}, tau = {:.3}, tau Delta = {:.3}, sustained = {}",
            stats,
            run.steady_occupation,
            run.result.tau,
            run.result.tau * run.delta,
            run.result.sustained
        );
        let curve = run.curve.unwrap_or_default();
        for (t, n, dn) in curve.iter().step_by((curve.len() / 6).max(1)) {
            println!("  t = {t:>8.3}  n = {n:.5}  delta_n = {dn:.4}");
        }
    }
    Ok(())
}
