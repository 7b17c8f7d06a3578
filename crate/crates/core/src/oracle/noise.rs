//! Noise mechanisms and their second-moment bounds.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Label, LabeledExample, ModelVector, ObjectiveSpec};

/// Second-moment bound `Γ²` of an oracle, with a lower-bound variant used by
/// the interval line search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevel {
    pub gamma_sq: f64,
    pub gamma_sq_lower: f64,
}

impl NoiseLevel {
    pub fn gamma(&self) -> f64 {
        self.gamma_sq.sqrt()
    }
}

/// Draws `Z` with density proportional to `exp(−(ε/2)‖z‖)` in `d`
/// dimensions: the norm is Gamma(d, 2/ε) and the direction is uniform on the
/// sphere (a normalized standard Gaussian vector).
pub fn dp_noise_sample<R: Rng + ?Sized>(epsilon: f64, d: usize, rng: &mut R) -> Vec<f64> {
    debug_assert!(epsilon > 0.0 && d >= 1);
    let radius_law = Gamma::new(d as f64, 2.0 / epsilon).expect("valid gamma parameters");
    let radius = radius_law.sample(rng);
    scaled_direction(radius, d, rng)
}

/// Spherical Gaussian noise with `E‖Z‖² = second_moment`.
pub fn gaussian_noise_sample<R: Rng + ?Sized>(second_moment: f64, d: usize, rng: &mut R) -> Vec<f64> {
    let sd = (second_moment / d as f64).sqrt();
    (0..d)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            sd * z
        })
        .collect()
}

fn scaled_direction<R: Rng + ?Sized>(radius: f64, d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut u: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = crate::model::norm(&u);
        if n > 0.0 {
            u.iter_mut().for_each(|v| *v *= radius / n);
            return u;
        }
    }
}

/// `Γ² = 4 + 4(d²+d)/(ε²b)`; the lower variant drops the constant 4.
pub fn dp_noise_level(epsilon: f64, d: usize, batch_size: usize) -> Result<NoiseLevel> {
    if !(epsilon > 0.0) || d == 0 || batch_size == 0 {
        return Err(Error::InvalidParameter(format!(
            "dp noise level needs positive inputs (epsilon={epsilon}, d={d}, b={batch_size})"
        )));
    }
    let d = d as f64;
    let noise = 4.0 * (d * d + d) / (epsilon * epsilon * batch_size as f64);
    Ok(NoiseLevel {
        gamma_sq: 4.0 + noise,
        gamma_sq_lower: noise,
    })
}

/// `Γ² = 3 + 1/(1−2σ)²`. No separate lower bound exists for label noise, so
/// both fields are equal.
pub fn rcn_noise_level(sigma: f64) -> Result<NoiseLevel> {
    check_sigma(sigma)?;
    let g = 3.0 + 1.0 / (1.0 - 2.0 * sigma).powi(2);
    Ok(NoiseLevel {
        gamma_sq: g,
        gamma_sq_lower: g,
    })
}

/// Spherical Gaussian additive noise of second moment `V²` averaged over a
/// batch of `b`. The non-noise part is bounded by 4 as for local DP.
pub fn gaussian_noise_level(second_moment: f64, batch_size: usize) -> Result<NoiseLevel> {
    if !(second_moment >= 0.0) || batch_size == 0 {
        return Err(Error::InvalidParameter(format!(
            "gaussian noise level needs V² ≥ 0 and b ≥ 1 (V²={second_moment}, b={batch_size})"
        )));
    }
    let noise = second_moment / batch_size as f64;
    Ok(NoiseLevel {
        gamma_sq: 4.0 + noise,
        gamma_sq_lower: noise,
    })
}

/// Returns `−y` with probability `sigma`.
pub fn rcn_flip_label<R: Rng + ?Sized>(y: Label, sigma: f64, rng: &mut R) -> Label {
    if rng.gen::<f64>() < sigma {
        y.flipped()
    } else {
        y
    }
}

/// Gradient of the unbiased surrogate
/// `ℓ̃(w,x,ỹ,σ) = [(1−σ)ℓ(w,x,ỹ) − σℓ(w,x,−ỹ)] / (1−2σ)`.
pub fn rcn_surrogate_gradient(
    objective: &ObjectiveSpec,
    w: &ModelVector,
    x: &[f64],
    y_tilde: Label,
    sigma: f64,
) -> Result<Vec<f64>> {
    check_sigma(sigma)?;
    if w.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: x.len(),
        });
    }
    let coef = surrogate_coefficient(objective, crate::model::dot(w, x), y_tilde, sigma);
    Ok(x.iter().map(|v| coef * v).collect())
}

/// Scalar `s` with `∇ℓ̃ = s · x`, given the raw score `wᵀx`.
pub(crate) fn surrogate_coefficient(
    objective: &ObjectiveSpec,
    score: f64,
    y_tilde: Label,
    sigma: f64,
) -> f64 {
    let y = y_tilde.sign();
    let loss = objective.loss;
    let same = loss.derivative_at_margin(y * score) * y;
    let other = loss.derivative_at_margin(-y * score) * -y;
    ((1.0 - sigma) * same - sigma * other) / (1.0 - 2.0 * sigma)
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if !(0.0..0.5).contains(&sigma) {
        return Err(Error::InvalidParameter(format!(
            "label flip probability must lie in [0, 0.5), got {sigma}"
        )));
    }
    Ok(())
}

/// Plain loss gradient for the example, as used by the noiseless paths.
pub(crate) fn clean_coefficient(objective: &ObjectiveSpec, score: f64, ex: &LabeledExample) -> f64 {
    let y = ex.y.sign();
    objective.loss.derivative_at_margin(y * score) * y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Loss;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dp_levels() {
        let l = dp_noise_level(1.0, 25, 1).unwrap();
        assert_eq!(l.gamma_sq, 2604.0);
        let l = dp_noise_level(2.0, 25, 50).unwrap();
        assert!((l.gamma_sq - 17.0).abs() < 1e-12);
        for (e, d, b) in [(0.3, 3, 7), (10.0, 100, 50), (1.0, 1, 1)] {
            let l = dp_noise_level(e, d, b).unwrap();
            assert!((l.gamma_sq - l.gamma_sq_lower - 4.0).abs() < 1e-9);
        }
        assert!(dp_noise_level(0.0, 2, 1).is_err());
    }

    #[test]
    fn rcn_levels() {
        assert_eq!(rcn_noise_level(0.0).unwrap().gamma_sq, 4.0);
        assert!((rcn_noise_level(0.25).unwrap().gamma_sq - 7.0).abs() < 1e-12);
        let mut prev = 0.0;
        for i in 0..50 {
            let g = rcn_noise_level(i as f64 * 0.0099).unwrap().gamma_sq;
            assert!(g > prev);
            prev = g;
        }
        assert!(rcn_noise_level(0.5).is_err());
        assert!(rcn_noise_level(-0.1).is_err());
    }

    #[test]
    fn zero_flip_rate_never_flips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(rcn_flip_label(Label::Pos, 0.0, &mut rng), Label::Pos);
        }
    }

    #[test]
    fn surrogate_reduces_to_plain_gradient() {
        let obj = ObjectiveSpec::new(0.5, Loss::Logistic).unwrap();
        let w = ModelVector::from(vec![0.3, -0.2]);
        let ex = LabeledExample::new(vec![0.4, 0.1], Label::Neg);
        let g = rcn_surrogate_gradient(&obj, &w, &ex.x, ex.y, 0.0).unwrap();
        assert_eq!(g, obj.loss_gradient(&w, &ex).unwrap().0);
    }

    #[test]
    fn surrogate_hand_value() {
        let obj = ObjectiveSpec::new(0.5, Loss::Logistic).unwrap();
        let g = rcn_surrogate_gradient(&obj, &ModelVector::zeros(2), &[1.0, 0.0], Label::Pos, 0.25)
            .unwrap();
        assert!((g[0] + 1.0).abs() < 1e-15 && g[1] == 0.0);
    }

    #[test]
    fn surrogate_is_unbiased_over_both_flip_outcomes() {
        let obj = ObjectiveSpec::new(0.5, Loss::Logistic).unwrap();
        let w = ModelVector::from(vec![0.7, -1.3, 0.2]);
        let ex = LabeledExample::new(vec![0.2, 0.5, -0.6], Label::Pos);
        for sigma in [0.05, 0.2, 0.45] {
            let keep = rcn_surrogate_gradient(&obj, &w, &ex.x, ex.y, sigma).unwrap();
            let flip = rcn_surrogate_gradient(&obj, &w, &ex.x, ex.y.flipped(), sigma).unwrap();
            let truth = obj.loss_gradient(&w, &ex).unwrap();
            for i in 0..3 {
                let e = (1.0 - sigma) * keep[i] + sigma * flip[i];
                assert!((e - truth[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gaussian_sample_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(gaussian_noise_sample(2.0, 7, &mut rng).len(), 7);
        assert_eq!(dp_noise_sample(2.0, 7, &mut rng).len(), 7);
    }
}
