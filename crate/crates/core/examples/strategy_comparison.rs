//! Final objective of the rate-selection strategies across noisy-source
//! privacy levels, on a small synthetic problem.

use hetero_sgd::harness::{run_strategy_comparison, DataSource, ExperimentConfig};

fn main() -> hetero_sgd::Result<()> {
    let config = ExperimentConfig {
        data: DataSource::Synthetic { d: 10, n: 3000, flip_rate: 0.1 },
        noisy_sweep: vec![1.0, 2.0, 5.0],
        trials: 30,
        ..ExperimentConfig::default()
    };
    for row in run_strategy_comparison(&config)? {
        println!("eps_N = {:>4}  {:<12} {:.5} ± {:.5}", row.sweep_param, row.strategy, row.mean, row.stderr);
    }
    Ok(())
}
