//! Steady-state occupations by frequency quadrature and by the Sylvester solve.
use nhrelax::dynamics::steady_diagonal_quadrature;
use nhrelax::ndlinalg::{lyapunov_residual, solve_steady_sylvester, CMatrix};
use nhrelax::{ModelSpec, Statistics};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for stats in [Statistics::Fermion, Statistics::Boson] {
        let spec = ModelSpec::hn(stats, 24, 1.0, 0.8, 0.0, 0.15);
        let h = spec.h_eff()?;
        let quad = steady_diagonal_quadrature(&spec)?;
        let c = solve_steady_sylvester(&h, 2.0 * spec.gamma)?;
        let source = CMatrix::identity(spec.l).scale((2.0 * spec.gamma).into());
        let worst = quad.iter().enumerate().map(|(k, q)| (q - c[(k, k)].re).abs()).fold(0.0, f64::max);
        println!("{stats:?}: n_1 = {:.6}, n_L = {:.6}, max |quad - sylvester| = {worst:.2e}, residual = {:.2e}",
            quad[0], quad[spec.l - 1], lyapunov_residual(&h, &c, &source));
    }
    Ok(())
}
