//! Data-order analysis for SGD with `η_t = c/t`.
//!
//! Unrolling the linear-loss recursion, the noise injected at step `t`
//! reaches the final iterate multiplied by `Δ_t = (c/t)∏_{s>t}(1 − cλ/s)`, so
//! the expected squared deviation between a noisy run and its noiseless twin
//! is `Σ Δ_t² E‖Z_t‖²`. Whether `Δ_t` grows or shrinks with `t` (that is,
//! whether `c` is above or below `1/λ`) decides which data should go first.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sgd::InterleavePattern;

/// `Δ_1, …, Δ_T` for a given rate constant, with the log-magnitudes and
/// signs used to compute them.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaWeights {
    pub c: f64,
    pub lambda: f64,
    pub t: usize,
    pub deltas: Vec<f64>,
    /// `ln|Δ_t|`, `−∞` when a factor `1 − cλ/s` is exactly zero.
    pub log_abs: Vec<f64>,
    pub signs: Vec<f64>,
}

impl DeltaWeights {
    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

/// Computes the weights by accumulating `ln|1 − cλ/s|` from `s = T` down,
/// tracking the sign of each factor so `c > 1/λ` is handled exactly.
pub fn delta_weights(c: f64, lambda: f64, t: usize) -> DeltaWeights {
    let mut log_abs = vec![0.0; t];
    let mut signs = vec![0.0; t];
    // Suffix product over s = step+1..=T.
    let mut suffix_log = 0.0;
    let mut suffix_sign = 1.0;
    for step in (1..=t).rev() {
        log_abs[step - 1] = (c / step as f64).ln() + suffix_log;
        signs[step - 1] = suffix_sign;
        let factor = 1.0 - c * lambda / step as f64;
        if factor == 0.0 {
            suffix_log = f64::NEG_INFINITY;
            suffix_sign = 0.0;
        } else {
            suffix_log += factor.abs().ln();
            if factor < 0.0 {
                suffix_sign = -suffix_sign;
            }
        }
    }
    let deltas = log_abs
        .iter()
        .zip(&signs)
        .map(|(&l, &s)| if s == 0.0 { 0.0 } else { s * l.exp() })
        .collect();
    DeltaWeights {
        c,
        lambda,
        t,
        deltas,
        log_abs,
        signs,
    }
}

/// Per-step noise second moments `E‖Z_t‖²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseVarianceSchedule {
    pub variances: Vec<f64>,
}

impl NoiseVarianceSchedule {
    pub fn new(variances: Vec<f64>) -> Self {
        Self { variances }
    }

    /// Maps each pattern entry (an oracle id) to that oracle's variance.
    pub fn from_pattern(pattern: &InterleavePattern, per_oracle: &[f64]) -> Result<Self> {
        let variances = pattern
            .sequence
            .iter()
            .map(|&id| {
                per_oracle.get(id).copied().ok_or_else(|| {
                    Error::PatternMismatch(format!("no variance given for oracle {id}"))
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { variances })
    }

    pub fn len(&self) -> usize {
        self.variances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variances.is_empty()
    }
}

/// `Σ_t Δ_t² · variances[t]`.
pub fn closed_form_deviation(deltas: &DeltaWeights, schedule: &NoiseVarianceSchedule) -> Result<f64> {
    if deltas.len() != schedule.len() {
        return Err(Error::LengthMismatch {
            left: deltas.len(),
            right: schedule.len(),
        });
    }
    Ok(deltas
        .deltas
        .iter()
        .zip(&schedule.variances)
        .map(|(d, v)| d * d * v)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderVerdict {
    CleanFirstBest,
    NoisyFirstBest,
    Tie,
}

/// Relative tolerance under which clean-first and noisy-first count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderComparison {
    pub verdict: OrderVerdict,
    pub clean_first: f64,
    pub noisy_first: f64,
    /// Deviation of each supplied arbitrary-order pattern.
    pub arbitrary: Vec<f64>,
}

/// Evaluates the closed-form deviation for clean-first, noisy-first and the
/// given interleavings (oracle 0 clean, oracle 1 noisy).
pub fn compare_orders(
    c: f64,
    lambda: f64,
    t_clean: usize,
    t_noisy: usize,
    v_clean_sq: f64,
    v_noisy_sq: f64,
    arbitrary: &[InterleavePattern],
) -> Result<OrderComparison> {
    let deltas = delta_weights(c, lambda, t_clean + t_noisy);
    let per_oracle = [v_clean_sq, v_noisy_sq];
    let eval = |p: &InterleavePattern| -> Result<f64> {
        let counts = p.counts(2);
        if counts != [t_clean, t_noisy] || p.len() != t_clean + t_noisy {
            return Err(Error::PatternMismatch(format!(
                "pattern counts {counts:?} do not match ({t_clean}, {t_noisy})"
            )));
        }
        closed_form_deviation(&deltas, &NoiseVarianceSchedule::from_pattern(p, &per_oracle)?)
    };
    let clean_first = eval(&InterleavePattern::clean_first(t_clean, t_noisy))?;
    let noisy_first = eval(&InterleavePattern::noisy_first(t_clean, t_noisy))?;
    let arbitrary = arbitrary.iter().map(eval).collect::<Result<Vec<_>>>()?;

    let scale = clean_first.abs().max(noisy_first.abs());
    let verdict = if (clean_first - noisy_first).abs() <= TIE_TOLERANCE * scale {
        OrderVerdict::Tie
    } else if clean_first < noisy_first {
        OrderVerdict::CleanFirstBest
    } else {
        OrderVerdict::NoisyFirstBest
    };
    Ok(OrderComparison {
        verdict,
        clean_first,
        noisy_first,
        arbitrary,
    })
}

/// [`compare_orders`] with `n_patterns` uniformly random interleavings.
#[allow(clippy::too_many_arguments)]
pub fn compare_orders_random<R: Rng + ?Sized>(
    c: f64,
    lambda: f64,
    t_clean: usize,
    t_noisy: usize,
    v_clean_sq: f64,
    v_noisy_sq: f64,
    n_patterns: usize,
    rng: &mut R,
) -> Result<OrderComparison> {
    let patterns: Vec<_> = (0..n_patterns)
        .map(|_| InterleavePattern::random(&[t_clean, t_noisy], rng))
        .collect();
    compare_orders(c, lambda, t_clean, t_noisy, v_clean_sq, v_noisy_sq, &patterns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-14 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn unit_rate_is_flat() {
        let d = delta_weights(1.0, 1.0, 3);
        assert!(d.deltas.iter().all(|&v| close(v, 1.0 / 3.0)));
    }

    #[test]
    fn small_rate_decreases() {
        let d = delta_weights(0.5, 1.0, 10);
        assert!(d.deltas.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn large_rate_hand_values() {
        let d = delta_weights(2.0, 1.0, 3);
        assert_eq!(d.deltas[0], 0.0);
        assert!(close(d.deltas[1], 1.0 / 3.0));
        assert!(close(d.deltas[2], 2.0 / 3.0));
    }

    #[test]
    fn deviation_hand_values() {
        let d = delta_weights(2.0, 1.0, 2);
        assert!(close(d.deltas[0], 0.0) && close(d.deltas[1], 1.0));
        let (vc, vn) = (1.0, 9.0);
        let cf = closed_form_deviation(&d, &NoiseVarianceSchedule::new(vec![vc, vn])).unwrap();
        let nf = closed_form_deviation(&d, &NoiseVarianceSchedule::new(vec![vn, vc])).unwrap();
        assert_eq!((cf, nf), (vn, vc));
        let zero = closed_form_deviation(&d, &NoiseVarianceSchedule::new(vec![0.0, 0.0])).unwrap();
        assert_eq!(zero, 0.0);
        assert!(matches!(
            closed_form_deviation(&d, &NoiseVarianceSchedule::new(vec![1.0])),
            Err(Error::LengthMismatch { left: 2, right: 1 })
        ));
    }

    #[test]
    fn verdicts_follow_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = compare_orders_random(0.5, 1.0, 20, 80, 1.0, 25.0, 20, &mut rng).unwrap();
        assert_eq!(r.verdict, OrderVerdict::CleanFirstBest);
        assert!(r.arbitrary.iter().all(|&a| r.clean_first <= a && a <= r.noisy_first));
        let r = compare_orders_random(2.0, 1.0, 20, 80, 1.0, 25.0, 20, &mut rng).unwrap();
        assert_eq!(r.verdict, OrderVerdict::NoisyFirstBest);
        assert!(r.arbitrary.iter().all(|&a| r.noisy_first <= a && a <= r.clean_first));
        let r = compare_orders_random(1.0, 1.0, 20, 80, 1.0, 25.0, 20, &mut rng).unwrap();
        assert_eq!(r.verdict, OrderVerdict::Tie);
    }

    #[test]
    fn equal_variances_are_order_free() {
        let d = delta_weights(0.7, 1.3, 12);
        let sum_sq: f64 = d.deltas.iter().map(|x| x * x).sum();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let p = InterleavePattern::random(&[5, 7], &mut rng);
            let s = NoiseVarianceSchedule::from_pattern(&p, &[3.0, 3.0]).unwrap();
            let v = closed_form_deviation(&d, &s).unwrap();
            assert!((v - 3.0 * sum_sq).abs() < 1e-12 * v);
        }
    }

    proptest! {
        #[test]
        fn ratio_law(c in 0.05f64..5.0, lambda in 0.1f64..3.0, t in 2usize..300) {
            let d = delta_weights(c, lambda, t);
            for s in 1..t {
                let (a, b) = (d.deltas[s - 1], d.deltas[s]);
                if a != 0.0 && b != 0.0 {
                    let want = (1.0 + (1.0 - c * lambda) / s as f64).powi(-2);
                    let got = (b / a).powi(2);
                    prop_assert!((got - want).abs() <= 1e-10 * want);
                }
            }
        }
    }
}
