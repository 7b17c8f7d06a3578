//! Choosing the order and the second-phase rate from the bound, and the
//! interval in which the best c₂ must lie when the noise is only bracketed.

use hetero_sgd::oracle::dp_noise_level;
use hetero_sgd::rates::{algorithm2_select, c2_interval_search, lemma2_interval, SourceNoise};

fn main() -> hetero_sgd::Result<()> {
    let (lambda, beta_c, d, b) = (1e-3, 0.1, 25, 50);
    let clean = dp_noise_level(10.0, d, b)?;
    for eps_n in [0.5, 1.0, 2.0, 5.0, 10.0] {
        let noisy = dp_noise_level(eps_n, d, b)?;
        let upper = SourceNoise::new(clean.gamma_sq, noisy.gamma_sq, beta_c, lambda)?;
        let lower = SourceNoise::new(clean.gamma_sq_lower, noisy.gamma_sq_lower, beta_c, lambda)?;
        let sel = algorithm2_select(&upper)?;
        let search = c2_interval_search(&upper, &lower, 12, |c2| upper.h(sel.order, c2))?;
        println!(
            "eps_N = {eps_n:>4}: {:?}, c2·λ = {:.3}, bound·T = {:.4e}, interval c2·λ ∈ [{:.3}, {:.3}]",
            sel.order,
            sel.c2 * lambda,
            sel.bound_value,
            search.lower.c2.min(search.upper.c2) * lambda,
            search.lower.c2.max(search.upper.c2) * lambda,
        );
    }
    let iv = lemma2_interval(1.0, 100.0, 0.9, lambda)?;
    println!("\nbracket for a 10× noisier second source (β_N = 0.9): {:?} [{:.3}, {:.3}], valid = {}", iv.regime, iv.lo, iv.hi, iv.valid);
    Ok(())
}
