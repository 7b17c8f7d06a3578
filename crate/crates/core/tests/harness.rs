//! Experiment harness: projection, file I/O, configs and reproducibility.

use std::path::Path;

use hetero_sgd::harness::experiments::Experiment;
use hetero_sgd::harness::output::{parse_csv, render_csv, CSV_HEADER};
use hetero_sgd::harness::{
    emit_csv, emit_plotdata, generate_synthetic, ingest_csv, ingest_libsvm, random_projection, DataSource,
    ExperimentConfig, RunSpec, Strategy, SyntheticSpec,
};
use hetero_sgd::model::{dot, Loss};
use hetero_sgd::oracle::OracleKind;
use hetero_sgd::Error;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn configs_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/configs"))
}

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        data: DataSource::Synthetic { d: 5, n: 600, flip_rate: 0.1 },
        trials: 8,
        noisy_sweep: vec![1.0, 4.0],
        master_seed: 3,
        ..ExperimentConfig::default()
    }
}

#[test]
fn projection_roughly_preserves_distances() {
    let d_in = 200;
    let data = generate_synthetic(&SyntheticSpec { d: d_in, n: 500, flip_rate: 0.0 }, 1).unwrap();
    let projected = hetero_sgd::harness::RandomProjection::new(d_in, 25, 2).unwrap();
    // A single squared distance scales like χ²_k/k after projecting to k
    // dimensions; accept the central 99% band of that law.
    let law = ChiSquared::new(25.0).unwrap();
    let (lo, hi) = (law.inverse_cdf(0.005) / 25.0, law.inverse_cdf(0.995) / 25.0);
    let (mut ok, mut total) = (0, 0);
    for i in (0..500).step_by(5) {
        for j in (i + 1..500).step_by(7) {
            let (a, b) = (&data.examples()[i].x, &data.examples()[j].x);
            let diff: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
            let before = dot(&diff, &diff);
            let p = projected.apply(&diff);
            let after = dot(&p, &p);
            total += 1;
            ok += usize::from((lo..=hi).contains(&(after / before)));
        }
    }
    assert!(ok as f64 >= 0.95 * total as f64, "{ok}/{total}");
    let normalized = random_projection(&data, 25, 2).unwrap();
    assert_eq!(normalized.dim(), 25);
    assert!((normalized.max_norm() - 1.0).abs() < 1e-12);
}

#[test]
fn csv_and_libsvm_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    std::fs::write(&csv, "# label,x1,x2,x3\n1,0.5,0,0.1\n-1,0,0.2,0\n0,1,1,1\n").unwrap();
    let ds = ingest_csv(&csv).unwrap();
    assert_eq!((ds.len(), ds.dim()), (3, 3));
    let svm = dir.path().join("d.svm");
    std::fs::write(&svm, "+1 1:0.5 3:0.1\n-1 2:0.2\n0 1:1 2:1 3:1\n").unwrap();
    let ds2 = ingest_libsvm(&svm).unwrap();
    assert_eq!(ds, ds2);

    std::fs::write(&csv, "1,0.5,0\n-1,0.2\n").unwrap();
    assert!(matches!(ingest_csv(&csv), Err(Error::InconsistentDimension { .. })));
    std::fs::write(&csv, "").unwrap();
    assert!(matches!(ingest_csv(&csv), Err(Error::EmptyFile(_))));
    std::fs::write(&svm, "1 1:0.5\n1 x:2\n").unwrap();
    assert!(matches!(ingest_libsvm(&svm), Err(Error::Parse { line: 2, .. })));
}

#[test]
fn shipped_configs_load() {
    let mut n = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(cfg.objective.loss, Loss::Logistic);
        n += 1;
    }
    assert!(n >= 4);
    let order = ExperimentConfig::load(configs_dir().join("order_exp.json")).unwrap();
    assert_eq!(order.strategies, Strategy::ORDERS.to_vec());
    let rcn = ExperimentConfig::load(configs_dir().join("strategy_cmp_label_noise.json")).unwrap();
    assert_eq!(rcn.noisy.kind, OracleKind::Rcn { sigma: 0.2 });
    assert!(ExperimentConfig::from_json(r#"{"trails": 3}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"beta_c": 1.5}"#).is_err());
}

#[test]
fn results_round_trip_through_files() {
    let cfg = ExperimentConfig { trials: 4, ..small_config() };
    let rows = Experiment::prepare(&cfg).unwrap().run_strategy_comparison().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    emit_csv(&rows, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    assert_eq!(text, render_csv(&rows));
    assert_eq!(parse_csv(&path).unwrap(), rows);
    let plots = emit_plotdata(&rows, dir.path()).unwrap();
    assert_eq!(plots.len(), Strategy::COMPARISON.len());
    assert!(rows.iter().all(|r| r.seconds == 0.0 && r.trials == 4));
}

#[test]
fn experiments_are_reproducible_and_thread_independent() {
    let cfg = small_config();
    let a = render_csv(&Experiment::prepare(&cfg).unwrap().run_strategy_comparison().unwrap());
    let b = render_csv(
        &Experiment::prepare(&ExperimentConfig { threads: Some(3), ..cfg.clone() })
            .unwrap()
            .run_strategy_comparison()
            .unwrap(),
    );
    assert_eq!(a, b);
    let c = render_csv(
        &Experiment::prepare(&ExperimentConfig { master_seed: 4, ..cfg })
            .unwrap()
            .run_strategy_comparison()
            .unwrap(),
    );
    assert_ne!(a, c);
}

#[test]
fn single_trials_do_not_depend_on_neighbours() {
    let exp = Experiment::prepare(&small_config()).unwrap();
    let kind = OracleKind::LocalDp { epsilon: 2.0 };
    let spec = RunSpec::AllClean { c: 1.0 / exp.lambda() };
    let forward: Vec<_> = (0..4).map(|t| exp.run_trial(spec, kind, 0, t).unwrap()).collect();
    let backward: Vec<_> = (0..4).rev().map(|t| exp.run_trial(spec, kind, 0, t).unwrap()).collect();
    assert!(forward.iter().eq(backward.iter().rev()));
}

#[test]
fn order_experiment_sides_of_unit_rate() {
    let cfg = ExperimentConfig {
        objective: hetero_sgd::harness::ObjectiveConfig { lambda: 0.01, loss: Loss::Logistic, radius: None },
        data: DataSource::Synthetic { d: 5, n: 2000, flip_rate: 0.1 },
        clean: hetero_sgd::harness::OracleConfig { kind: OracleKind::LocalDp { epsilon: 10.0 }, batch_size: 1 },
        noisy: hetero_sgd::harness::OracleConfig { kind: OracleKind::LocalDp { epsilon: 1.0 }, batch_size: 1 },
        strategies: vec![Strategy::CleanFirst, Strategy::NoisyFirst],
        c_grid: vec![0.5, 2.0],
        trials: 40,
        ..ExperimentConfig::default()
    };
    let rows = Experiment::prepare(&cfg).unwrap().run_order_experiment().unwrap();
    let get = |name: &str, mult: f64| {
        rows.iter()
            .find(|r| r.strategy == name && (r.sweep_param * cfg.objective.lambda - mult).abs() < 1e-9)
            .unwrap()
            .mean
    };
    assert!(get("CF", 0.5) < get("NF", 0.5));
    assert!(get("NF", 2.0) < get("CF", 2.0));
}
