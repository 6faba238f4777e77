//! Cancellation among spectral terms of G(L, 1; t) compared with the stable time-stepped value.
use nhrelax::analysis::interference_terms;
use nhrelax::{ModelSpec, Statistics};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for l in [20, 40, 80] {
        let spec = ModelSpec::hn(Statistics::Fermion, l, 1.0, 0.999, 0.0, 0.05);
        let t = (l - 1) as f64 / spec.gap();
        let dump = interference_terms(&spec, l, 1, t)?;
        println!(
            "L = {l:>3}: largest term 1e{:.1}, naive sum 1e{:.1}, stable 1e{:.1}, cancellation {:.1} decades",
            dump.max_term_log10,
            dump.naive_sum_log10,
            dump.stable_log10,
            dump.cancellation_decades()
        );
    }
    Ok(())
}
