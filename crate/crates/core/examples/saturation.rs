//! Fermionic plateau of tau Delta against the propagation length across pump strengths.
use nhrelax::analysis::{saturation_study, DEFAULT_SATURATION_GAMMAS};
use nhrelax::{ModelSpec, Statistics};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = ModelSpec::hn(Statistics::Fermion, 40, 1.0, 0.999, 0.0, 0.3);
    let report = saturation_study(&DEFAULT_SATURATION_GAMMAS, &base, (-1.0f64).exp(), true)?;
    for p in &report.points {
        println!("Gamma = {:.2}  xi_prop = {:.3}  tau_sat Delta = {:.3}  (plateau at L = {})", p.gamma, p.xi_prop, p.tau_sat_times_delta, p.plateau_l);
    }
    println!("slope = {:.4}, r^2 = {:.5}, dropped = {:?}", report.fit.slope, report.fit.r_squared, report.dropped);
    Ok(())
}
