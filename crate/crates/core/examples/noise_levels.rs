//! Second-moment bounds Γ² for local-DP and label-noise oracles.

use hetero_sgd::oracle::{dp_noise_level, rcn_noise_level};

fn main() -> hetero_sgd::Result<()> {
    println!("local DP, d = 25, b = 50");
    println!("{:>6} {:>14} {:>14}", "eps", "upper", "lower");
    for eps in [0.5, 1.0, 2.0, 5.0, 10.0] {
        let g = dp_noise_level(eps, 25, 50)?;
        println!("{eps:>6} {:>14.3} {:>14.3}", g.gamma_sq, g.gamma_sq_lower);
    }
    println!("\nlabel noise");
    println!("{:>6} {:>14}", "sigma", "gamma_sq");
    for sigma in [0.0, 0.1, 0.2, 0.3, 0.4, 0.45] {
        println!("{sigma:>6} {:>14.3}", rcn_noise_level(sigma)?.gamma_sq);
    }
    Ok(())
}
