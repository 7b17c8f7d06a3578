//! Planted-hyperplane classification data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dot, Dataset, Label, LabeledExample, ModelVector};

/// Gaussian features, labels `sign(w_trueᵀx)` flipped with probability
/// `flip_rate`, features rescaled so the largest norm is 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub d: usize,
    pub n: usize,
    #[serde(default)]
    pub flip_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub dataset: Dataset,
    pub w_true: ModelVector,
    /// Whether each example's label was flipped away from the hyperplane.
    pub flipped: Vec<bool>,
}

pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<Dataset> {
    Ok(generate_synthetic_with_truth(spec, seed)?.dataset)
}

pub fn generate_synthetic_with_truth(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticSample> {
    if spec.d == 0 || spec.n == 0 {
        return Err(Error::InvalidParameter(format!(
            "synthetic data needs d ≥ 1 and n ≥ 1 (d={}, n={})",
            spec.d, spec.n
        )));
    }
    if !(0.0..=1.0).contains(&spec.flip_rate) {
        return Err(Error::InvalidParameter(format!(
            "flip rate must lie in [0, 1], got {}",
            spec.flip_rate
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w_true: Vec<f64> = (0..spec.d).map(|_| rng.sample(StandardNormal)).collect();
    let mut flipped = Vec::with_capacity(spec.n);
    let examples = (0..spec.n)
        .map(|_| {
            let x: Vec<f64> = (0..spec.d).map(|_| rng.sample(StandardNormal)).collect();
            let clean = Label::from_sign(dot(&w_true, &x));
            let flip = rng.gen::<f64>() < spec.flip_rate;
            flipped.push(flip);
            LabeledExample::new(x, if flip { clean.flipped() } else { clean })
        })
        .collect();
    Ok(SyntheticSample {
        dataset: Dataset::new(spec.d, examples)?.normalized(),
        w_true: ModelVector::from(w_true),
        flipped,
    })
}
