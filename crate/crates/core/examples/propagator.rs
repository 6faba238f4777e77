//! End-to-end propagator P(L, j; t) by time stepping, the no-bounce formula and its leading order.
use nhrelax::propagator::{p_no_bounce, p_simplified, peak_stats, propagate_direct};
use nhrelax::{ModelSpec, Statistics};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ModelSpec::hn(Statistics::Fermion, 40, 1.0, 0.999, 0.0, 0.05);
    let j = 20;
    let grid: Vec<f64> = (0..=8).map(|k| 5.0 * k as f64).collect();
    let direct = propagate_direct(&spec.h_eff()?, j, &grid)?;
    println!("{:>6} {:>12} {:>12} {:>12}", "t", "direct", "no_bounce", "simplified");
    for (k, &t) in grid.iter().enumerate() {
        let row = direct.iter().filter(|s| s.m == spec.l).nth(k).expect("last-site sample");
        println!(
            "{t:>6.1} {:>12.4} {:>12.4} {:>12.4}",
            row.log_p(),
            p_no_bounce(&spec, j, t)?.log_p(),
            p_simplified(&spec, j, t)?.log_p()
        );
    }
    let peak = peak_stats(&spec, j)?;
    println!("peak at t = {:.3} (d/Delta = {:.3}), ln P = {:.4}", peak.t_max, peak.t_max_analytic, peak.log_height);
    Ok(())
}
