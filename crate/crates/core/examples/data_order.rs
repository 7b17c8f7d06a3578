//! Which source should go first? The closed-form deviation Σ Δ_t² E‖Z_t‖²
//! for clean-first, noisy-first and random interleavings across rates.

use hetero_sgd::ordering::compare_orders_random;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hetero_sgd::Result<()> {
    let lambda = 1.0;
    let (t_clean, t_noisy) = (100, 900);
    let (v_clean, v_noisy) = (1.0, 25.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}  verdict", "c·λ", "clean-first", "noisy-first", "random min", "random max");
    for c in [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0] {
        let r = compare_orders_random(c / lambda, lambda, t_clean, t_noisy, v_clean, v_noisy, 50, &mut rng)?;
        let lo = r.arbitrary.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = r.arbitrary.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!("{c:>6} {:>12.4e} {:>12.4e} {lo:>12.4e} {hi:>12.4e}  {:?}", r.clean_first, r.noisy_first, r.verdict);
    }
    Ok(())
}
