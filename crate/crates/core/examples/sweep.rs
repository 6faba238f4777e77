//! Length sweep of the bosonic relaxation time with a linear scaling fit and the eigenvector estimate.
use nhrelax::analysis::{evec_prediction, run_sweep, scaling_fit, LengthConvention, SweepAxis};
use nhrelax::dynamics::RelaxConfig;
use nhrelax::{ModelSpec, Statistics};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = ModelSpec::hn(Statistics::Boson, 20, 1.0, 0.999, 0.0, 0.2);
    let lengths: Vec<f64> = (1..=9).map(|k| 20.0 * k as f64).collect();
    let sweep = run_sweep(&base, SweepAxis::L, &lengths, &RelaxConfig::default(), true)?;
    for p in &sweep.points {
        let evec = evec_prediction(&p.spec, LengthConvention::Sites)?;
        println!("L = {:>4}  tau Delta = {:>8.3}  tau_EVec Delta = {:>10.3}", p.value, p.tau_times_delta, evec.tau_times_delta);
    }
    let fit = scaling_fit(&sweep, 0.5)?;
    println!("slope d(tau)/dL = {:.4}, times Delta = {:.4}, r^2 = {:.6}", fit.slope, fit.slope * base.gap(), fit.r_squared);
    Ok(())
}
