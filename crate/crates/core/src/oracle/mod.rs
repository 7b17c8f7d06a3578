//! Noisy gradient oracles.
//!
//! An [`Oracle`] walks a fixed, seeded permutation of its dataset and on each
//! call returns the batch average of `λw + ∇ℓ(w, x, y) + Z` over the next `b`
//! examples. It may be called at most `⌊budget / b⌋` times. Permutation and
//! noise use separate ChaCha streams of the same seed, so a noiseless twin
//! built from the same spec visits the examples in exactly the same order.

mod noise;

pub use noise::{
    dp_noise_level, dp_noise_sample, gaussian_noise_level, gaussian_noise_sample, rcn_flip_label,
    rcn_noise_level, rcn_surrogate_gradient, NoiseLevel,
};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dot, Dataset, ModelVector, ObjectiveSpec};

const PERMUTATION_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

/// Which mechanism perturbs the gradient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Clean,
    /// ε-local differential privacy: additive noise with density ∝ e^{−(ε/2)‖z‖}.
    LocalDp { epsilon: f64 },
    /// Random classification noise: each label flipped with probability σ,
    /// gradient taken on the unbiased surrogate loss.
    Rcn { sigma: f64 },
    /// Additive spherical Gaussian noise with `E‖Z‖² = second_moment` per
    /// example. Carries no privacy guarantee; used to check the data-order
    /// analysis, which only constrains the mean and second moment of `Z`.
    Gaussian { second_moment: f64 },
}

impl OracleKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            OracleKind::Clean => Ok(()),
            OracleKind::LocalDp { epsilon } if epsilon > 0.0 && epsilon.is_finite() => Ok(()),
            OracleKind::LocalDp { epsilon } => Err(Error::InvalidParameter(format!(
                "local DP epsilon must be positive, got {epsilon}"
            ))),
            OracleKind::Rcn { sigma } => noise::check_sigma(sigma),
            OracleKind::Gaussian { second_moment } if second_moment >= 0.0 => Ok(()),
            OracleKind::Gaussian { second_moment } => Err(Error::InvalidParameter(format!(
                "gaussian second moment must be ≥ 0, got {second_moment}"
            ))),
        }
    }

    pub fn is_additive(&self) -> bool {
        matches!(self, OracleKind::LocalDp { .. } | OracleKind::Gaussian { .. })
    }

    /// Noise level for dimension `d` and batch size `b`. Clean oracles report
    /// the bound 4 on the non-noise part with a zero lower bound.
    pub fn noise_level(&self, d: usize, batch_size: usize) -> Result<NoiseLevel> {
        match *self {
            OracleKind::Clean => Ok(NoiseLevel {
                gamma_sq: 4.0,
                gamma_sq_lower: 0.0,
            }),
            OracleKind::LocalDp { epsilon } => dp_noise_level(epsilon, d, batch_size),
            OracleKind::Rcn { sigma } => rcn_noise_level(sigma),
            OracleKind::Gaussian { second_moment } => {
                gaussian_noise_level(second_moment, batch_size)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub kind: OracleKind,
    /// Maximum number of examples the oracle may consume.
    pub budget: usize,
    pub batch_size: usize,
    pub rng_seed: u64,
}

impl OracleSpec {
    pub fn new(kind: OracleKind, budget: usize, batch_size: usize, rng_seed: u64) -> Self {
        Self {
            kind,
            budget,
            batch_size,
            rng_seed,
        }
    }

    /// Calls available from a fresh oracle.
    pub fn steps(&self) -> usize {
        self.budget.checked_div(self.batch_size).unwrap_or(0)
    }
}

/// Result of one oracle invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCallRecord {
    pub gradient: Vec<f64>,
    /// Examples consumed so far by this oracle, including this call.
    pub calls_consumed: usize,
    /// Batch-averaged additive noise, present when recording is enabled.
    pub injected_noise: Option<Vec<f64>>,
}

/// A stateful single-consumer gradient oracle over a borrowed dataset.
#[derive(Debug, Clone)]
pub struct Oracle<'a> {
    spec: OracleSpec,
    objective: ObjectiveSpec,
    data: &'a Dataset,
    order: Vec<usize>,
    cursor: usize,
    noise_rng: ChaCha8Rng,
    noiseless: bool,
    record_noise: bool,
}

impl<'a> Oracle<'a> {
    pub fn new(spec: OracleSpec, objective: ObjectiveSpec, data: &'a Dataset) -> Result<Self> {
        spec.kind.validate()?;
        if spec.batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be ≥ 1".into()));
        }
        if spec.budget == 0 {
            return Err(Error::InvalidParameter("oracle budget must be ≥ 1".into()));
        }
        if spec.budget > data.len() {
            return Err(Error::InvalidParameter(format!(
                "oracle budget {} exceeds dataset size {}",
                spec.budget,
                data.len()
            )));
        }
        let mut perm_rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
        perm_rng.set_stream(PERMUTATION_STREAM);
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut perm_rng);
        order.truncate(spec.budget);

        let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
        noise_rng.set_stream(NOISE_STREAM);

        Ok(Self {
            spec,
            objective,
            data,
            order,
            cursor: 0,
            noise_rng,
            noiseless: false,
            record_noise: false,
        })
    }

    /// A fresh oracle over the same data and permutation that adds no noise
    /// (and, for label noise, sees the true labels with the plain loss).
    pub fn noiseless_twin(&self) -> Oracle<'a> {
        let mut twin = Oracle::new(self.spec, self.objective, self.data)
            .expect("spec was validated at construction");
        twin.noiseless = true;
        twin
    }

    pub fn set_record_noise(&mut self, on: bool) {
        self.record_noise = on;
    }

    pub fn spec(&self) -> &OracleSpec {
        &self.spec
    }

    pub fn objective(&self) -> &ObjectiveSpec {
        &self.objective
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn is_noiseless(&self) -> bool {
        self.noiseless
    }

    pub fn calls_consumed(&self) -> usize {
        self.cursor
    }

    pub fn steps_remaining(&self) -> usize {
        (self.spec.budget - self.cursor) / self.spec.batch_size
    }

    pub fn noise_level(&self) -> Result<NoiseLevel> {
        self.spec.kind.noise_level(self.dim(), self.spec.batch_size)
    }

    /// Data indices in traversal order (truncated to the budget).
    pub fn traversal_order(&self) -> &[usize] {
        &self.order
    }

    pub fn call(&mut self, w: &ModelVector) -> Result<OracleCallRecord> {
        let mut gradient = vec![0.0; self.dim()];
        let noise = self.call_into(w, &mut gradient)?;
        Ok(OracleCallRecord {
            gradient,
            calls_consumed: self.cursor,
            injected_noise: noise,
        })
    }

    /// Writes the averaged noisy gradient into `out`. Returns the averaged
    /// additive noise when recording is on.
    pub(crate) fn call_into(&mut self, w: &[f64], out: &mut [f64]) -> Result<Option<Vec<f64>>> {
        let d = self.dim();
        if w.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: w.len(),
            });
        }
        let b = self.spec.batch_size;
        let remaining = self.spec.budget - self.cursor;
        if remaining < b {
            return Err(Error::BudgetExhausted {
                remaining,
                requested: b,
            });
        }

        out.iter_mut().for_each(|v| *v = 0.0);
        let mut noise_sum = self.record_noise.then(|| vec![0.0; d]);
        let kind = if self.noiseless {
            OracleKind::Clean
        } else {
            self.spec.kind
        };

        for &idx in &self.order[self.cursor..self.cursor + b] {
            let ex = &self.data.examples()[idx];
            let score = dot(w, &ex.x);
            let coef = match kind {
                OracleKind::Rcn { sigma } => {
                    let y_tilde = rcn_flip_label(ex.y, sigma, &mut self.noise_rng);
                    noise::surrogate_coefficient(&self.objective, score, y_tilde, sigma)
                }
                _ => noise::clean_coefficient(&self.objective, score, ex),
            };
            for (o, x) in out.iter_mut().zip(&ex.x) {
                *o += coef * x;
            }
            let z = match kind {
                OracleKind::LocalDp { epsilon } => Some(dp_noise_sample(epsilon, d, &mut self.noise_rng)),
                OracleKind::Gaussian { second_moment } => {
                    Some(gaussian_noise_sample(second_moment, d, &mut self.noise_rng))
                }
                _ => None,
            };
            if let Some(z) = z {
                for (o, zi) in out.iter_mut().zip(&z) {
                    *o += zi;
                }
                if let Some(acc) = noise_sum.as_mut() {
                    acc.iter_mut().zip(&z).for_each(|(a, zi)| *a += zi);
                }
            }
        }
        self.cursor += b;

        let inv_b = 1.0 / b as f64;
        let lambda = self.objective.lambda;
        for (o, wi) in out.iter_mut().zip(w) {
            *o = lambda * wi + *o * inv_b;
        }
        if let Some(acc) = noise_sum.as_mut() {
            acc.iter_mut().for_each(|a| *a *= inv_b);
        }
        Ok(noise_sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Label, LabeledExample, Loss};

    fn toy(n: usize) -> Dataset {
        let ex = (0..n)
            .map(|i| {
                let a = i as f64 / n as f64;
                LabeledExample::new(
                    vec![a, 1.0 - a],
                    if i % 3 == 0 { Label::Neg } else { Label::Pos },
                )
            })
            .collect();
        Dataset::new(2, ex).unwrap().normalized()
    }

    #[test]
    fn clean_linear_oracle_is_exact() {
        let data = toy(12);
        let obj = ObjectiveSpec::new(0.5, Loss::Linear).unwrap();
        let mut o = Oracle::new(OracleSpec::new(OracleKind::Clean, 12, 3, 4), obj, &data).unwrap();
        let w = ModelVector::from(vec![0.2, -0.4]);
        let order = o.traversal_order()[..3].to_vec();
        let rec = o.call(&w).unwrap();
        for j in 0..2 {
            let mean: f64 = order
                .iter()
                .map(|&i| data.examples()[i].y.sign() * data.examples()[i].x[j])
                .sum::<f64>()
                / 3.0;
            assert!((rec.gradient[j] - (0.5 * w[j] - mean)).abs() < 1e-15);
        }
        assert_eq!(rec.calls_consumed, 3);
    }

    #[test]
    fn budget_exhaustion() {
        let data = toy(10);
        let obj = ObjectiveSpec::new(1.0, Loss::Logistic).unwrap();
        let mut o = Oracle::new(OracleSpec::new(OracleKind::Clean, 10, 3, 1), obj, &data).unwrap();
        let w = ModelVector::zeros(2);
        assert_eq!(o.steps_remaining(), 3);
        for _ in 0..3 {
            o.call(&w).unwrap();
        }
        assert_eq!(o.calls_consumed(), 9);
        assert!(matches!(
            o.call(&w),
            Err(Error::BudgetExhausted {
                remaining: 1,
                requested: 3
            })
        ));
    }

    #[test]
    fn budget_cannot_exceed_dataset() {
        let data = toy(5);
        let obj = ObjectiveSpec::new(1.0, Loss::Logistic).unwrap();
        assert!(Oracle::new(OracleSpec::new(OracleKind::Clean, 6, 1, 1), obj, &data).is_err());
        assert!(Oracle::new(
            OracleSpec::new(OracleKind::Rcn { sigma: 0.5 }, 5, 1, 1),
            obj,
            &data
        )
        .is_err());
    }

    #[test]
    fn same_seed_same_traversal_and_noise() {
        let data = toy(40);
        let obj = ObjectiveSpec::new(0.1, Loss::Logistic).unwrap();
        let spec = OracleSpec::new(OracleKind::LocalDp { epsilon: 1.0 }, 40, 4, 77);
        let mut a = Oracle::new(spec, obj, &data).unwrap();
        let mut b = Oracle::new(spec, obj, &data).unwrap();
        assert_eq!(a.traversal_order(), b.traversal_order());
        let w = ModelVector::from(vec![0.3, 0.1]);
        for _ in 0..10 {
            assert_eq!(a.call(&w).unwrap(), b.call(&w).unwrap());
        }
    }

    #[test]
    fn twin_differs_only_by_recorded_noise() {
        let data = toy(30);
        let obj = ObjectiveSpec::new(0.1, Loss::Hinge).unwrap();
        let spec = OracleSpec::new(OracleKind::LocalDp { epsilon: 2.0 }, 30, 5, 5);
        let mut noisy = Oracle::new(spec, obj, &data).unwrap();
        noisy.set_record_noise(true);
        let mut twin = noisy.noiseless_twin();
        assert_eq!(noisy.traversal_order(), twin.traversal_order());
        let w = ModelVector::from(vec![-0.5, 0.25]);
        while noisy.steps_remaining() > 0 {
            let a = noisy.call(&w).unwrap();
            let b = twin.call(&w).unwrap();
            let z = a.injected_noise.unwrap();
            assert!(b.injected_noise.is_none());
            for ((ga, gb), zj) in a.gradient.iter().zip(b.gradient.iter()).zip(&z) {
                assert!((ga - gb - zj).abs() < 1e-12);
            }
        }
    }
}
