//! Final objective as a function of the second-phase rate, in both orders,
//! with the bound's bracket around the best c₂.

use hetero_sgd::harness::{DataSource, Experiment, ExperimentConfig};

fn main() -> hetero_sgd::Result<()> {
    let config = ExperimentConfig {
        data: DataSource::Synthetic { d: 10, n: 3000, flip_rate: 0.1 },
        noisy_sweep: vec![2.0],
        c2_points: 9,
        trials: 20,
        ..ExperimentConfig::default()
    };
    let exp = Experiment::prepare(&config)?;
    let lambda = exp.lambda();
    let (_, points) = exp.run_c2_sweep_detailed()?;
    for point in &points {
        let clean = &point.clean_only;
        println!("eps_N = {}: clean only {:.5} ± {:.5}", point.noisy_param, clean.mean, clean.stderr);
        for order in &point.orders {
            let (lo, hi) = order.bracket();
            println!("  {:?}, bracket c2·λ ∈ [{:.3}, {:.3}]", order.order, lo * lambda, hi * lambda);
            for row in &order.rows {
                println!("    c2·λ = {:>8.4}  {:.5} ± {:.5}", row.sweep_param * lambda, row.mean, row.stderr);
            }
        }
        let (order, best) = point.best();
        println!("  best: {:?} at c2·λ = {:.3}", order.order, best.sweep_param * lambda);
    }
    Ok(())
}
