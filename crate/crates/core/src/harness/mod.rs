//! Experiment harness: data sources, experiments, aggregation and output.

pub mod config;
pub mod data;
pub mod experiments;
pub mod output;
pub mod projection;
pub mod stats;
pub mod synthetic;

pub use config::{DataSource, ExperimentConfig, ObjectiveConfig, OracleConfig, Strategy};
pub use data::{ingest_csv, ingest_libsvm};
pub use experiments::{
    run_c2_sweep, run_order_experiment, run_strategy_comparison, C2SweepPoint, Experiment, RunSpec,
};
pub use output::{emit_csv, emit_plotdata, parse_csv, ResultRow};
pub use projection::{random_projection, RandomProjection};
pub use synthetic::{generate_synthetic, SyntheticSpec};
