use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use hetero_sgd::harness::experiments::Experiment;
use hetero_sgd::harness::output::{emit_csv, emit_meta, emit_plotdata, git_hash, RunMeta};
use hetero_sgd::harness::ExperimentConfig;
use hetero_sgd::oracle::{dp_noise_level, rcn_noise_level};
use hetero_sgd::rates::algorithm2_select;
use hetero_sgd::Result;

#[derive(Parser)]
#[command(version, about = "SGD with clean and noisy gradient sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Noisy-vs-noiseless gap for clean-first, noisy-first and random order over a grid of c.
    OrderExp(RunArgs),
    /// Final objective of Optimal, CleanOnly, SameClean, SameNoisy and Algorithm2.
    StrategyCmp(RunArgs),
    /// Final objective over a grid of second-phase rates c2.
    C2Sweep(RunArgs),
    /// Print the selected order and rates (upper and lower noise levels) as JSON.
    SelectRates(RunArgs),
    /// Print the noise level of a local-DP or label-noise oracle as JSON.
    NoiseLevel(NoiseArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration; defaults apply to omitted keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(d) = &self.out_dir {
            cfg.output_dir = d.clone();
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct NoiseArgs {
    /// Local-DP privacy parameter.
    #[arg(long, conflicts_with = "sigma", required_unless_present = "sigma")]
    epsilon: Option<f64>,
    /// Label flip probability.
    #[arg(long)]
    sigma: Option<f64>,
    /// Feature dimension.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Batch size.
    #[arg(long, default_value_t = 1)]
    b: usize,
}

fn run_experiment(name: &str, args: &RunArgs) -> Result<()> {
    let cfg = args.load()?;
    let start = Instant::now();
    let exp = Experiment::prepare(&cfg)?;
    let rows = match name {
        "order-exp" => exp.run_order_experiment()?,
        "strategy-cmp" => exp.run_strategy_comparison()?,
        _ => exp.run_c2_sweep()?,
    };
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| hetero_sgd::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    emit_csv(&rows, dir.join("results.csv"))?;
    emit_plotdata(&rows, dir)?;
    let meta = RunMeta {
        command: name.to_string(),
        config: serde_json::to_value(&cfg).expect("config serializes"),
        git_hash: git_hash(),
        runtime_seconds: start.elapsed().as_secs_f64(),
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    emit_meta(&meta, dir.join("meta.json"))?;
    for r in &rows {
        println!("{:<24} {:>12.6e} {:>12.6} ± {:.6}", r.strategy, r.sweep_param, r.mean, r.stderr);
    }
    eprintln!("wrote {} rows to {}", rows.len(), dir.join("results.csv").display());
    Ok(())
}

fn select_rates(args: &RunArgs) -> Result<()> {
    let cfg = args.load()?;
    let exp = Experiment::prepare(&cfg)?;
    let (clean, noisy) = exp.noise_levels(cfg.noisy.kind)?;
    let upper = algorithm2_select(&exp.source_noise(cfg.noisy.kind, true)?)?;
    let lower = algorithm2_select(&exp.source_noise(cfg.noisy.kind, false)?)?;
    let out = serde_json::json!({
        "lambda": exp.lambda(),
        "beta_c": exp.beta_c(),
        "clean_noise": clean,
        "noisy_noise": noisy,
        "upper": upper,
        "lower": lower,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    Ok(())
}

fn noise_level(args: &NoiseArgs) -> Result<()> {
    let level = match (args.epsilon, args.sigma) {
        (Some(e), _) => dp_noise_level(e, args.d, args.b)?,
        (None, Some(s)) => rcn_noise_level(s)?,
        (None, None) => unreachable!("clap requires one of --epsilon / --sigma"),
    };
    println!("{}", serde_json::to_string_pretty(&level).expect("json"));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::OrderExp(a) => run_experiment("order-exp", a),
        Command::StrategyCmp(a) => run_experiment("strategy-cmp", a),
        Command::C2Sweep(a) => run_experiment("c2-sweep", a),
        Command::SelectRates(a) => select_rates(a),
        Command::NoiseLevel(a) => noise_level(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
