//! Projected SGD over a schedule of oracles.
//!
//! Every run executes `w_{t+1} = Π(w_t − (c/t)·𝒢(w_t))` with a single global
//! step counter `t` starting at 1. The counter never resets when the schedule
//! moves from one oracle to the next, and a mini-batch call counts as one step.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{project_in_place, Dataset, ModelVector};
use crate::oracle::Oracle;

/// One phase of a plan: drain oracle `oracle` using rate constant `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub oracle: usize,
    pub c: f64,
}

/// Ordered oracle phases, each with its own rate constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePlan {
    pub phases: Vec<Phase>,
    pub lambda: f64,
    pub radius: f64,
}

impl PhasePlan {
    pub fn new(phases: Vec<Phase>, lambda: f64, radius: f64) -> Self {
        Self {
            phases,
            lambda,
            radius,
        }
    }

    /// Two phases, oracle `first` then oracle `second`.
    pub fn two_phase(first: usize, c1: f64, second: usize, c2: f64, lambda: f64, radius: f64) -> Self {
        Self::new(
            vec![
                Phase { oracle: first, c: c1 },
                Phase {
                    oracle: second,
                    c: c2,
                },
            ],
            lambda,
            radius,
        )
    }

    fn validate(&self, n_oracles: usize) -> Result<()> {
        if self.phases.is_empty() {
            return Err(Error::InvalidParameter("plan has no phases".into()));
        }
        let mut seen = vec![false; n_oracles];
        for p in &self.phases {
            check_rate(p.c)?;
            match seen.get_mut(p.oracle) {
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "phase references oracle {} but only {n_oracles} supplied",
                        p.oracle
                    )))
                }
                Some(true) => {
                    return Err(Error::InvalidParameter(format!(
                        "oracle {} appears in more than one phase",
                        p.oracle
                    )))
                }
                Some(s) => *s = true,
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidParameter(format!(
                "oracle {i} is not used by any phase"
            )));
        }
        Ok(())
    }
}

/// Which oracle to query at each step, for arbitrary interleavings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterleavePattern {
    pub sequence: Vec<usize>,
}

impl InterleavePattern {
    pub fn new(sequence: Vec<usize>) -> Self {
        Self { sequence }
    }

    /// Oracle 0 for `clean_steps` steps, then oracle 1 for `noisy_steps`.
    pub fn clean_first(clean_steps: usize, noisy_steps: usize) -> Self {
        Self::blocks(&[(0, clean_steps), (1, noisy_steps)])
    }

    /// Oracle 1 for `noisy_steps` steps, then oracle 0 for `clean_steps`.
    pub fn noisy_first(clean_steps: usize, noisy_steps: usize) -> Self {
        Self::blocks(&[(1, noisy_steps), (0, clean_steps)])
    }

    pub fn blocks(blocks: &[(usize, usize)]) -> Self {
        Self::new(
            blocks
                .iter()
                .flat_map(|&(id, n)| std::iter::repeat(id).take(n))
                .collect(),
        )
    }

    /// A uniformly random interleaving where oracle `i` appears `steps[i]` times.
    pub fn random<R: Rng + ?Sized>(steps: &[usize], rng: &mut R) -> Self {
        let mut seq: Vec<usize> = steps
            .iter()
            .enumerate()
            .flat_map(|(id, &n)| std::iter::repeat(id).take(n))
            .collect();
        seq.shuffle(rng);
        Self::new(seq)
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    /// Number of occurrences of each oracle id in `0..n_oracles`.
    pub fn counts(&self, n_oracles: usize) -> Vec<usize> {
        let mut counts = vec![0; n_oracles];
        for &id in &self.sequence {
            if id < n_oracles {
                counts[id] += 1;
            }
        }
        counts
    }
}

/// How often iterates (and objective values) are recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnapshotStride {
    /// Every `max(1, T/1000)` steps.
    #[default]
    Auto,
    Every(usize),
    Off,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions<'d> {
    pub snapshots: SnapshotStride,
    /// When set, `f(w_t)` on this dataset is recorded at every snapshot.
    pub objective_data: Option<&'d Dataset>,
    /// Keep the batch-averaged injected noise of each step.
    pub record_noise: bool,
}

impl<'d> RunOptions<'d> {
    pub fn final_only() -> Self {
        Self {
            snapshots: SnapshotStride::Off,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `(t, w_{t+1})` pairs at the snapshot stride; the final iterate is always included.
    pub iterates: Vec<(usize, ModelVector)>,
    pub final_w: ModelVector,
    pub steps: usize,
    pub objective_curve: Vec<(usize, f64)>,
    /// Per-step batch-averaged noise `Z_t` (empty unless recorded; zero
    /// vectors for steps served by oracles without additive noise).
    pub injected_noise: Vec<Vec<f64>>,
    /// Examples drawn from each oracle during the run.
    pub examples_consumed: Vec<usize>,
}

/// The schedule a run follows: explicit phases or a per-step pattern with one rate.
#[derive(Debug, Clone, PartialEq)]
pub enum StepPlan {
    Phases(PhasePlan),
    Interleaved {
        pattern: InterleavePattern,
        c: f64,
        lambda: f64,
        radius: f64,
    },
}

impl StepPlan {
    fn resolve(&self, oracles: &[Oracle<'_>]) -> Result<Schedule> {
        match self {
            StepPlan::Phases(plan) => {
                plan.validate(oracles.len())?;
                let mut steps = Vec::new();
                for p in &plan.phases {
                    let n = oracles[p.oracle].steps_remaining();
                    steps.extend(std::iter::repeat((p.oracle, p.c)).take(n));
                }
                Ok(Schedule {
                    steps,
                    lambda: plan.lambda,
                    radius: plan.radius,
                })
            }
            StepPlan::Interleaved {
                pattern,
                c,
                lambda,
                radius,
            } => {
                check_rate(*c)?;
                if let Some(&bad) = pattern.sequence.iter().find(|&&id| id >= oracles.len()) {
                    return Err(Error::PatternMismatch(format!(
                        "pattern references oracle {bad} but only {} supplied",
                        oracles.len()
                    )));
                }
                let counts = pattern.counts(oracles.len());
                for (i, (o, &n)) in oracles.iter().zip(&counts).enumerate() {
                    if o.steps_remaining() != n {
                        return Err(Error::PatternMismatch(format!(
                            "oracle {i} has {} steps available but the pattern uses {n}",
                            o.steps_remaining()
                        )));
                    }
                }
                Ok(Schedule {
                    steps: pattern.sequence.iter().map(|&id| (id, *c)).collect(),
                    lambda: *lambda,
                    radius: *radius,
                })
            }
        }
    }
}

struct Schedule {
    steps: Vec<(usize, f64)>,
    lambda: f64,
    radius: f64,
}

/// Runs a phased plan (the two-rate scheme when there are two phases).
pub fn run_sgd(plan: &PhasePlan, oracles: &mut [Oracle<'_>], w0: &ModelVector) -> Result<Trajectory> {
    run_sgd_with(&StepPlan::Phases(plan.clone()), oracles, w0, &RunOptions::default())
}

/// Runs with a single rate constant `c`, querying oracles in pattern order.
pub fn run_sgd_interleaved(
    pattern: &InterleavePattern,
    c: f64,
    lambda: f64,
    radius: f64,
    oracles: &mut [Oracle<'_>],
    w0: &ModelVector,
) -> Result<Trajectory> {
    let plan = StepPlan::Interleaved {
        pattern: pattern.clone(),
        c,
        lambda,
        radius,
    };
    run_sgd_with(&plan, oracles, w0, &RunOptions::default())
}

pub fn run_sgd_with(
    plan: &StepPlan,
    oracles: &mut [Oracle<'_>],
    w0: &ModelVector,
    opts: &RunOptions<'_>,
) -> Result<Trajectory> {
    let schedule = plan.resolve(oracles)?;
    execute(&schedule, oracles, w0, opts)
}

/// Runs the plan twice over identical data order: once with the oracles'
/// noise (returned first) and once with noise forced to zero. The oracles
/// must be fresh. The noisy trajectory carries the per-step injected noise.
pub fn run_paired(
    plan: &StepPlan,
    oracles: &mut [Oracle<'_>],
    w0: &ModelVector,
    opts: &RunOptions<'_>,
) -> Result<(Trajectory, Trajectory)> {
    if let Some(i) = oracles.iter().position(|o| o.calls_consumed() > 0) {
        return Err(Error::PreconditionViolated(format!(
            "paired runs need fresh oracles; oracle {i} has already been called"
        )));
    }
    let mut twins: Vec<Oracle<'_>> = oracles.iter().map(Oracle::noiseless_twin).collect();
    let schedule = plan.resolve(oracles)?;
    let noisy_opts = RunOptions {
        record_noise: true,
        ..*opts
    };
    let twin_opts = RunOptions {
        record_noise: false,
        ..*opts
    };
    let noisy = execute(&schedule, oracles, w0, &noisy_opts)?;
    let clean = execute(&schedule, &mut twins, w0, &twin_opts)?;
    Ok((noisy, clean))
}

fn check_rate(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveRate(c))
    }
}

fn execute(
    schedule: &Schedule,
    oracles: &mut [Oracle<'_>],
    w0: &ModelVector,
    opts: &RunOptions<'_>,
) -> Result<Trajectory> {
    let d = w0.len();
    if let Some(o) = oracles.iter().find(|o| o.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: o.dim(),
            found: d,
        });
    }
    if let Some(o) = oracles.iter().find(|o| o.objective().lambda != schedule.lambda) {
        return Err(Error::InvalidParameter(format!(
            "plan lambda {} differs from oracle objective lambda {}",
            schedule.lambda,
            o.objective().lambda
        )));
    }
    if !(schedule.radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {}",
            schedule.radius
        )));
    }
    if w0.norm() > schedule.radius * (1.0 + 1e-12) {
        return Err(Error::PreconditionViolated(format!(
            "initial point has norm {} outside radius {}",
            w0.norm(),
            schedule.radius
        )));
    }

    let total = schedule.steps.len();
    let stride = match opts.snapshots {
        SnapshotStride::Auto => Some((total / 1000).max(1)),
        SnapshotStride::Every(k) => Some(k.max(1)),
        SnapshotStride::Off => None,
    };
    let objective = oracles.first().map(|o| *o.objective());
    let consumed_before: Vec<usize> = oracles.iter().map(Oracle::calls_consumed).collect();
    for o in oracles.iter_mut() {
        o.set_record_noise(opts.record_noise);
    }

    let mut w = w0.to_vec();
    let mut g = vec![0.0; d];
    let mut iterates = Vec::new();
    let mut curve = Vec::new();
    let mut injected = Vec::new();

    for (k, &(id, c)) in schedule.steps.iter().enumerate() {
        let t = k + 1;
        let z = oracles[id].call_into(&w, &mut g)?;
        let eta = c / t as f64;
        for (wi, gi) in w.iter_mut().zip(&g) {
            *wi -= eta * gi;
        }
        project_in_place(&mut w, schedule.radius);
        debug_assert!(crate::model::norm(&w) <= schedule.radius * (1.0 + 1e-9));

        if opts.record_noise {
            injected.push(z.unwrap_or_else(|| vec![0.0; d]));
        }
        if let Some(s) = stride {
            if t % s == 0 || t == total {
                let snap = ModelVector::from(w.clone());
                if let (Some(data), Some(obj)) = (opts.objective_data, objective.as_ref()) {
                    curve.push((t, obj.full_objective(&snap, data)?));
                }
                iterates.push((t, snap));
            }
        }
    }

    let examples_consumed = oracles
        .iter()
        .zip(&consumed_before)
        .map(|(o, before)| o.calls_consumed() - before)
        .collect();
    Ok(Trajectory {
        iterates,
        final_w: ModelVector::from(w),
        steps: total,
        objective_curve: curve,
        injected_noise: injected,
        examples_consumed,
    })
}
