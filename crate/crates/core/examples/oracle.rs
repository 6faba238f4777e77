//! Fock-space Lindblad evolution against the covariance equations, plus the third-quantization check.
use nhrelax::cli::verify::{oracle_deviation, run_suite};
use nhrelax::oracle::{third_quantization_check, FockState};
use nhrelax::{ModelSpec, Statistics};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = [0.0, 0.5, 1.0, 2.0, 4.0];
    let spec = ModelSpec::hn(Statistics::Fermion, 4, 1.0, 0.4, 0.1, 0.2);
    for start in [FockState::Vacuum, FockState::AllFilled] {
        let dev = oracle_deviation(&spec, start, &grid)?;
        println!("{start:?}: max |n_fock - n_cov| = {dev:.2e}");
    }
    let tq = third_quantization_check(&ModelSpec::hn(Statistics::Fermion, 3, 1.0, 0.5, 0.0, 0.2))?;
    println!("third quantization: eigen residual {:.1e}, shift residual {:.1e}", tq.eigen_residual, tq.shift_residual);
    for c in run_suite().checks {
        println!("{:<28} {:.2e} <= {:.0e}  {}", c.name, c.value, c.tolerance, if c.passed { "ok" } else { "FAIL" });
    }
    Ok(())
}
