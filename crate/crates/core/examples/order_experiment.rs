//! Gap between noisy runs and their noiseless twins for clean-first,
//! noisy-first and random orders over a grid of rates.

use hetero_sgd::harness::{run_order_experiment, DataSource, ExperimentConfig, OracleConfig, Strategy};
use hetero_sgd::oracle::OracleKind;

fn main() -> hetero_sgd::Result<()> {
    let config = ExperimentConfig {
        data: DataSource::Synthetic { d: 10, n: 2000, flip_rate: 0.1 },
        clean: OracleConfig { kind: OracleKind::LocalDp { epsilon: 10.0 }, batch_size: 1 },
        noisy: OracleConfig { kind: OracleKind::LocalDp { epsilon: 3.0 }, batch_size: 1 },
        strategies: Strategy::ORDERS.to_vec(),
        trials: 30,
        ..ExperimentConfig::default()
    };
    let lambda = config.objective.lambda;
    for row in run_order_experiment(&config)? {
        println!("c·λ = {:>4}  {:<3} {:.3e} ± {:.1e}", row.sweep_param * lambda, row.strategy, row.mean, row.stderr);
    }
    Ok(())
}
