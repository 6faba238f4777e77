//! Effective-Hamiltonian spectrum of a Hatano-Nelson chain against its closed form.
use nhrelax::models::{derived_scales, hn_spectral_analytic};
use nhrelax::ndlinalg::eigenvalues;
use nhrelax::{ModelSpec, Statistics};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ModelSpec::hn(Statistics::Fermion, 16, 1.0, 0.6, 0.0, 0.1);
    let scales = derived_scales(&spec)?;
    println!("J = {:.4}  xi_loc = {:.4}  Delta = {:.4}  tau_EVec = {:.4}", scales.j, scales.xi_loc, scales.delta, scales.tau_evec);
    let mut numeric = eigenvalues(&spec.h_eff()?)?;
    let mut exact = hn_spectral_analytic(&spec)?.eigenvalues;
    for v in [&mut numeric, &mut exact] {
        v.sort_by(|a, b| a.re.total_cmp(&b.re));
    }
    for (a, b) in numeric.iter().zip(&exact) {
        println!("{:>9.5} {:+.5}i   |diff| = {:.1e}", a.re, a.im, (a - b).norm());
    }
    Ok(())
}
