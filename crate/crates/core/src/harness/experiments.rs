//! The three experiments: data order, strategy comparison and the `c₂` sweep.
//!
//! The dataset is built once per experiment from the master seed; trials vary
//! only the oracles' permutations and noise. Every strategy at a sweep point
//! sees the same per-trial seeds, so differences between strategies are not
//! blurred by independent sampling noise.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, ModelVector, ObjectiveSpec};
use crate::oracle::{NoiseLevel, Oracle, OracleKind, OracleSpec};
use crate::rates::{
    algorithm2_select, minimize_c2, minimize_single_rate, DataOrder, RateSelection, SourceNoise,
    C2_MAX_FACTOR,
};
use crate::sgd::{run_paired, run_sgd_with, InterleavePattern, Phase, PhasePlan, RunOptions, StepPlan};

use super::config::{with_noise_param, DataSource, ExperimentConfig, Strategy};
use super::data::{ingest_csv, ingest_libsvm};
use super::output::ResultRow;
use super::projection::random_projection;
use super::stats::{derive_seed, mean_stderr};
use super::synthetic::generate_synthetic;

/// Sweep-point index reserved for dataset construction.
const DATA_POINT: u64 = u64::MAX;

mod stream {
    pub const CLEAN: u64 = 0;
    pub const NOISY: u64 = 1;
    pub const ALL: u64 = 2;
    pub const PATTERN: u64 = 3;
    pub const DATA: u64 = 4;
    pub const PROJECTION: u64 = 5;
    pub const SHUFFLE: u64 = 6;
}

/// Final objective and examples drawn in one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub value: f64,
    pub examples_consumed: usize,
}

/// What one strategy runs at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunSpec {
    /// Noiseless gradients over the full dataset.
    AllClean { c: f64 },
    /// The clean source alone.
    CleanOnly { c: f64 },
    /// Both sources, one after the other.
    TwoPhase {
        order: DataOrder,
        c_clean: f64,
        c_noisy: f64,
    },
}

/// Rates chosen by the bound for one noisy-source setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRates {
    pub noisy_kind: OracleKind,
    pub upper: SourceNoise,
    pub lower: SourceNoise,
    pub selection: RateSelection,
    pub same_clean_c: f64,
    pub same_noisy_c: f64,
}

/// Prepared data and configuration shared by all trials.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub objective: ObjectiveSpec,
    pub full: Dataset,
    pub clean: Dataset,
    pub noisy: Dataset,
}

impl Experiment {
    pub fn prepare(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let seed = |s| derive_seed(config.master_seed, DATA_POINT, 0, s);
        let mut full = match &config.data {
            DataSource::Synthetic { .. } => {
                generate_synthetic(&config.data.synthetic_spec().expect("synthetic"), seed(stream::DATA))?
            }
            DataSource::Csv { path } => ingest_csv(path)?,
            DataSource::Libsvm { path } => ingest_libsvm(path)?,
        };
        if let Some(d_out) = config.projection_dim {
            full = random_projection(&full, d_out, seed(stream::PROJECTION))?;
        }
        if !matches!(config.data, DataSource::Synthetic { .. }) {
            // Files are often sorted by label; shuffle before splitting.
            use rand::seq::SliceRandom;
            let mut ex = full.examples().to_vec();
            ex.shuffle(&mut ChaCha8Rng::seed_from_u64(seed(stream::SHUFFLE)));
            full = Dataset::new(full.dim(), ex)?;
        }
        let n_clean = (config.beta_c * full.len() as f64).round() as usize;
        if n_clean == 0 || n_clean >= full.len() {
            return Err(Error::Config(format!(
                "beta_c = {} leaves an empty source for {} examples",
                config.beta_c,
                full.len()
            )));
        }
        let (clean, noisy) = full.split_at(n_clean);
        let obj = &config.objective;
        let objective = ObjectiveSpec::with_radius(obj.lambda, obj.loss, obj.radius.unwrap_or(1.0 / obj.lambda))?;
        Ok(Self {
            config: config.clone(),
            objective,
            full,
            clean,
            noisy,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.objective.lambda
    }

    /// Fraction of all examples in the clean source.
    pub fn beta_c(&self) -> f64 {
        self.clean.len() as f64 / self.full.len() as f64
    }

    pub fn noise_levels(&self, noisy_kind: OracleKind) -> Result<(NoiseLevel, NoiseLevel)> {
        let d = self.full.dim();
        Ok((
            self.config.clean.kind.noise_level(d, self.config.clean.batch_size)?,
            noisy_kind.noise_level(d, self.config.noisy.batch_size)?,
        ))
    }

    /// Bound inputs with upper (`upper = true`) or lower noise levels.
    pub fn source_noise(&self, noisy_kind: OracleKind, upper: bool) -> Result<SourceNoise> {
        let (c, n) = self.noise_levels(noisy_kind)?;
        let pick = |l: NoiseLevel| if upper { l.gamma_sq } else { l.gamma_sq_lower };
        SourceNoise::new(pick(c), pick(n), self.beta_c(), self.lambda())
    }

    pub fn point_rates(&self, noisy_kind: OracleKind) -> Result<PointRates> {
        let upper = self.source_noise(noisy_kind, true)?;
        let lower = self.source_noise(noisy_kind, false)?;
        Ok(PointRates {
            noisy_kind,
            upper,
            lower,
            selection: algorithm2_select(&upper)?,
            same_clean_c: minimize_single_rate(&upper.inputs(DataOrder::CleanFirst, 1.0)?)?.c2,
            same_noisy_c: minimize_single_rate(&upper.inputs(DataOrder::NoisyFirst, 1.0)?)?.c2,
        })
    }

    /// The run a comparison strategy performs at a sweep point.
    pub fn run_spec(&self, strategy: Strategy, rates: &PointRates) -> Result<RunSpec> {
        let c_star = 1.0 / self.lambda();
        Ok(match strategy {
            Strategy::Optimal => RunSpec::AllClean { c: c_star },
            Strategy::CleanOnly => RunSpec::CleanOnly { c: c_star },
            Strategy::SameClean => RunSpec::TwoPhase {
                order: DataOrder::CleanFirst,
                c_clean: rates.same_clean_c,
                c_noisy: rates.same_clean_c,
            },
            Strategy::SameNoisy => RunSpec::TwoPhase {
                order: DataOrder::NoisyFirst,
                c_clean: rates.same_noisy_c,
                c_noisy: rates.same_noisy_c,
            },
            Strategy::Algorithm2 => {
                let (c_clean, c_noisy) = rates.selection.clean_noisy_rates();
                RunSpec::TwoPhase {
                    order: rates.selection.order,
                    c_clean,
                    c_noisy,
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "strategy {other} belongs to the order experiment"
                )))
            }
        })
    }

    fn oracle_spec(&self, kind: OracleKind, data: &Dataset, batch: usize, point: u64, trial: u64, s: u64) -> OracleSpec {
        OracleSpec::new(kind, data.len(), batch, derive_seed(self.config.master_seed, point, trial, s))
    }

    fn source_oracles(&self, noisy_kind: OracleKind, point: u64, trial: u64) -> Result<Vec<Oracle<'_>>> {
        let cfg = &self.config;
        Ok(vec![
            Oracle::new(
                self.oracle_spec(cfg.clean.kind, &self.clean, cfg.clean.batch_size, point, trial, stream::CLEAN),
                self.objective,
                &self.clean,
            )?,
            Oracle::new(
                self.oracle_spec(noisy_kind, &self.noisy, cfg.noisy.batch_size, point, trial, stream::NOISY),
                self.objective,
                &self.noisy,
            )?,
        ])
    }

    /// One trial of `spec`; the value is the regularized objective on the
    /// full dataset at the final iterate.
    pub fn run_trial(&self, spec: RunSpec, noisy_kind: OracleKind, point: u64, trial: u64) -> Result<TrialOutcome> {
        let cfg = &self.config;
        let lambda = self.lambda();
        let radius = self.objective.radius;
        let (mut oracles, plan) = match spec {
            RunSpec::AllClean { c } => (
                vec![Oracle::new(
                    self.oracle_spec(OracleKind::Clean, &self.full, cfg.clean.batch_size, point, trial, stream::ALL),
                    self.objective,
                    &self.full,
                )?],
                PhasePlan::new(vec![Phase { oracle: 0, c }], lambda, radius),
            ),
            RunSpec::CleanOnly { c } => (
                vec![Oracle::new(
                    self.oracle_spec(cfg.clean.kind, &self.clean, cfg.clean.batch_size, point, trial, stream::CLEAN),
                    self.objective,
                    &self.clean,
                )?],
                PhasePlan::new(vec![Phase { oracle: 0, c }], lambda, radius),
            ),
            RunSpec::TwoPhase {
                order,
                c_clean,
                c_noisy,
            } => {
                let plan = match order {
                    DataOrder::CleanFirst => PhasePlan::two_phase(0, c_clean, 1, c_noisy, lambda, radius),
                    DataOrder::NoisyFirst => PhasePlan::two_phase(1, c_noisy, 0, c_clean, lambda, radius),
                };
                (self.source_oracles(noisy_kind, point, trial)?, plan)
            }
        };
        let w0 = ModelVector::zeros(self.full.dim());
        let tr = run_sgd_with(&StepPlan::Phases(plan), &mut oracles, &w0, &RunOptions::final_only())?;
        Ok(TrialOutcome {
            value: self.objective.full_objective(&tr.final_w, &self.full)?,
            examples_consumed: tr.examples_consumed.iter().sum(),
        })
    }

    /// `|f(w_{T+1}) − f(v_{T+1})|` for one paired trial of an order strategy
    /// with the single rate `c`.
    pub fn run_order_trial(&self, strategy: Strategy, c: f64, point: u64, trial: u64) -> Result<TrialOutcome> {
        let mut oracles = self.source_oracles(self.config.noisy.kind, point, trial)?;
        let (sc, sn) = (oracles[0].steps_remaining(), oracles[1].steps_remaining());
        let pattern = match strategy {
            Strategy::CleanFirst => InterleavePattern::clean_first(sc, sn),
            Strategy::NoisyFirst => InterleavePattern::noisy_first(sc, sn),
            Strategy::ArbitraryOrder => {
                let seed = derive_seed(self.config.master_seed, point, trial, stream::PATTERN);
                InterleavePattern::random(&[sc, sn], &mut ChaCha8Rng::seed_from_u64(seed))
            }
            other => {
                return Err(Error::Config(format!(
                    "strategy {other} is not a data-order strategy"
                )))
            }
        };
        let plan = StepPlan::Interleaved {
            pattern,
            c,
            lambda: self.lambda(),
            radius: self.objective.radius,
        };
        let w0 = ModelVector::zeros(self.full.dim());
        let (noisy, clean) = run_paired(&plan, &mut oracles, &w0, &RunOptions::final_only())?;
        let f = |w| self.objective.full_objective(w, &self.full);
        Ok(TrialOutcome {
            value: (f(&noisy.final_w)? - f(&clean.final_w)?).abs(),
            examples_consumed: noisy.examples_consumed.iter().sum(),
        })
    }

    /// Runs `trial_fn` for every trial (in parallel) and aggregates in trial order.
    fn aggregate<F>(&self, strategy: String, sweep_param: f64, trial_fn: F) -> Result<ResultRow>
    where
        F: Fn(u64) -> Result<TrialOutcome> + Sync,
    {
        let start = Instant::now();
        let values = (0..self.config.trials as u64)
            .into_par_iter()
            .map(|t| trial_fn(t).map(|o| o.value))
            .collect::<Result<Vec<f64>>>()?;
        let (mean, stderr) = mean_stderr(&values);
        Ok(ResultRow {
            strategy,
            sweep_param,
            mean,
            stderr,
            trials: values.len(),
            seconds: if self.config.record_timing {
                start.elapsed().as_secs_f64()
            } else {
                0.0
            },
        })
    }

    fn in_pool<T: Send>(&self, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
        match self.config.threads {
            None => f(),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?
                .install(f),
        }
    }

    fn strategies(&self, order: bool) -> Vec<Strategy> {
        let chosen: Vec<Strategy> = self
            .config
            .strategies
            .iter()
            .copied()
            .filter(|s| s.is_order() == order)
            .collect();
        match (chosen.is_empty(), order) {
            (false, _) => chosen,
            (true, true) => Strategy::ORDERS.to_vec(),
            (true, false) => Strategy::COMPARISON.to_vec(),
        }
    }

    /// For each `c` in the grid (multiples of `1/λ`) and each order strategy,
    /// the mean gap between the noisy run and its noiseless twin. The sweep
    /// parameter is the raw rate constant `c`.
    pub fn run_order_experiment(&self) -> Result<Vec<ResultRow>> {
        let strategies = self.strategies(true);
        self.in_pool(|| {
            let mut rows = Vec::new();
            for (pi, &mult) in self.config.c_grid.iter().enumerate() {
                let c = mult / self.lambda();
                for &s in &strategies {
                    rows.push(self.aggregate(s.to_string(), c, |t| self.run_order_trial(s, c, pi as u64, t))?);
                }
            }
            Ok(rows)
        })
    }

    /// Final objective of each comparison strategy at each noisy-source
    /// setting in `noisy_sweep`; the sweep parameter is that setting.
    pub fn run_strategy_comparison(&self) -> Result<Vec<ResultRow>> {
        let strategies = self.strategies(false);
        self.in_pool(|| {
            let mut rows = Vec::new();
            for (pi, &p) in self.config.noisy_sweep.iter().enumerate() {
                let kind = with_noise_param(self.config.noisy.kind, p);
                kind.validate()?;
                let rates = self.point_rates(kind)?;
                for &s in &strategies {
                    let spec = self.run_spec(s, &rates)?;
                    rows.push(self.aggregate(s.to_string(), p, |t| self.run_trial(spec, kind, pi as u64, t))?);
                }
            }
            Ok(rows)
        })
    }

    pub fn run_c2_sweep(&self) -> Result<Vec<ResultRow>> {
        Ok(self.run_c2_sweep_detailed()?.0)
    }

    /// Two-rate runs with `c₁ = 1/λ` over a grid of `c₂` in both orders, plus
    /// the clean-only reference and runs at the bracket ends `c₂(L)`, `c₂(U)`
    /// and at the selector's `c₂`. Series are named `<label>/noisy=<p>`;
    /// the sweep parameter is the raw `c₂` (0 for the clean-only row).
    pub fn run_c2_sweep_detailed(&self) -> Result<(Vec<ResultRow>, Vec<C2SweepPoint>)> {
        self.in_pool(|| {
            let lambda = self.lambda();
            let c_star = 1.0 / lambda;
            let mut rows = Vec::new();
            let mut points = Vec::new();
            for (pi, &p) in self.config.noisy_sweep.iter().enumerate() {
                let kind = with_noise_param(self.config.noisy.kind, p);
                kind.validate()?;
                let rates = self.point_rates(kind)?;
                let point = pi as u64;
                let series = |label: &str| format!("{label}/noisy={p}");

                let clean_only = self.aggregate(series("CleanOnly"), 0.0, |t| {
                    self.run_trial(RunSpec::CleanOnly { c: c_star }, kind, point, t)
                })?;

                let mut orders = Vec::new();
                for order in [DataOrder::CleanFirst, DataOrder::NoisyFirst] {
                    let c_upper = minimize_c2(&rates.upper.inputs(order, 1.0)?)?.c2;
                    let c_lower = minimize_c2(&rates.lower.inputs(order, 1.0)?)?.c2;
                    let (lo, hi) = (c_upper.min(c_lower), c_upper.max(c_lower));
                    let grid = match &self.config.c2_grid {
                        Some(g) => g.iter().map(|m| m / lambda).collect(),
                        None => log_grid(lo / 3.0, (hi * 3.0).min(C2_MAX_FACTOR / lambda), self.config.c2_points),
                    };
                    let label = order_label(order);
                    let spec = |c2: f64| match order {
                        DataOrder::CleanFirst => RunSpec::TwoPhase {
                            order,
                            c_clean: c_star,
                            c_noisy: c2,
                        },
                        DataOrder::NoisyFirst => RunSpec::TwoPhase {
                            order,
                            c_clean: c2,
                            c_noisy: c_star,
                        },
                    };
                    let mut sweep = Vec::new();
                    for &c2 in &grid {
                        sweep.push(self.aggregate(series(label), c2, |t| self.run_trial(spec(c2), kind, point, t))?);
                    }
                    for (tag, c2) in [("c2L", c_lower), ("c2U", c_upper)] {
                        sweep.push(self.aggregate(series(&format!("{label}-{tag}")), c2, |t| {
                            self.run_trial(spec(c2), kind, point, t)
                        })?);
                    }
                    orders.push(C2OrderSweep {
                        order,
                        c2_lower: c_lower,
                        c2_upper: c_upper,
                        rows: sweep,
                    });
                }

                let sel = rates.selection;
                let alg2 = self.aggregate(series("Algorithm2"), sel.c2, |t| {
                    self.run_trial(self.run_spec(Strategy::Algorithm2, &rates)?, kind, point, t)
                })?;

                rows.push(clean_only.clone());
                for o in &orders {
                    rows.extend(o.rows.iter().cloned());
                }
                rows.push(alg2.clone());
                points.push(C2SweepPoint {
                    noisy_param: p,
                    clean_only,
                    orders,
                    algorithm2: alg2,
                    selection: sel,
                });
            }
            Ok((rows, points))
        })
    }
}

fn order_label(order: DataOrder) -> &'static str {
    match order {
        DataOrder::CleanFirst => "CF",
        DataOrder::NoisyFirst => "NF",
    }
}

/// `n` log-spaced points over `[lo, hi]` (just `lo` when `n ≤ 1` or `lo = hi`).
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || hi <= lo {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Sweep results for one order at one noisy-source setting.
#[derive(Debug, Clone, PartialEq)]
pub struct C2OrderSweep {
    pub order: DataOrder,
    pub c2_lower: f64,
    pub c2_upper: f64,
    /// Grid rows followed by the two bracket-end rows.
    pub rows: Vec<ResultRow>,
}

impl C2OrderSweep {
    pub fn bracket(&self) -> (f64, f64) {
        (self.c2_lower.min(self.c2_upper), self.c2_lower.max(self.c2_upper))
    }

    pub fn best(&self) -> &ResultRow {
        self.rows
            .iter()
            .min_by(|a, b| a.mean.total_cmp(&b.mean))
            .expect("sweep has rows")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct C2SweepPoint {
    pub noisy_param: f64,
    pub clean_only: ResultRow,
    pub orders: Vec<C2OrderSweep>,
    pub algorithm2: ResultRow,
    pub selection: RateSelection,
}

impl C2SweepPoint {
    /// The order sweep containing the lowest mean objective, and that row.
    pub fn best(&self) -> (&C2OrderSweep, &ResultRow) {
        self.orders
            .iter()
            .map(|o| (o, o.best()))
            .min_by(|a, b| a.1.mean.total_cmp(&b.1.mean))
            .expect("two orders")
    }
}

pub fn run_order_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Experiment::prepare(config)?.run_order_experiment()
}

pub fn run_strategy_comparison(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Experiment::prepare(config)?.run_strategy_comparison()
}

pub fn run_c2_sweep(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Experiment::prepare(config)?.run_c2_sweep()
}
