//! Learning-rate and order selection for two-phase SGD.
//!
//! With `β₁ = |D₁|/T` and `x = 2λc₂ − 1`, the leading term of the excess-risk
//! bound for phase rates `(c₁, c₂)` is
//!
//! ```text
//! B(c₁, c₂) = 4Γ₁²β₁ˣc₁² / (T(2λc₁ − 1)) + 4Γ₂²(1 − β₁ˣ)c₂² / (T·x)
//! ```
//!
//! which extends continuously to `x = 0` through `(1 − β₁ˣ)/x → ln(1/β₁)`.
//! The first term is minimised by `c₁ = 1/λ`; the remaining one-dimensional
//! problem in `c₂` is solved numerically for each data order and the better
//! order wins.

pub mod search;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use search::{golden_budgeted, grid_then_golden};

/// Half-width (in units of `2λc₂`) around 1 where the limit form of `B` is used.
pub const LIMIT_TAU: f64 = 1e-9;
/// `c₂` is searched over `[C2_MIN_FACTOR/λ, C2_MAX_FACTOR/λ]`.
pub const C2_MIN_FACTOR: f64 = 1e-6;
pub const C2_MAX_FACTOR: f64 = 1e3;
pub const GRID_POINTS: usize = 400;
pub const GOLDEN_REL_TOL: f64 = 1e-8;
/// Default number of callback evaluations for [`c2_interval_search`].
pub const DEFAULT_SEARCH_BUDGET: usize = 12;

/// Noise levels and split of the two phases, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub gamma1_sq: f64,
    pub gamma2_sq: f64,
    pub beta1: f64,
    pub lambda: f64,
    pub t: f64,
}

impl BoundInputs {
    pub fn new(gamma1_sq: f64, gamma2_sq: f64, beta1: f64, lambda: f64, t: f64) -> Result<Self> {
        let inputs = Self {
            gamma1_sq,
            gamma2_sq,
            beta1,
            lambda,
            t,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "beta1 must lie in (0, 1), got {}",
                self.beta1
            )));
        }
        if !(self.lambda > 0.0) || !(self.t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda and T must be positive (lambda={}, T={})",
                self.lambda, self.t
            )));
        }
        if !(self.gamma1_sq >= 0.0) || !(self.gamma2_sq >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise levels must be nonnegative (Γ₁²={}, Γ₂²={})",
                self.gamma1_sq, self.gamma2_sq
            )));
        }
        Ok(())
    }
}

/// `B(c₁, c₂)`. Requires `2λc₁ > 1`.
pub fn bound_b(inputs: &BoundInputs, c1: f64, c2: f64) -> Result<f64> {
    inputs.validate()?;
    let BoundInputs {
        gamma1_sq,
        gamma2_sq,
        beta1,
        lambda,
        t,
    } = *inputs;
    if !(2.0 * lambda * c1 > 1.0) {
        return Err(Error::PreconditionViolated(format!(
            "bound needs 2λc₁ > 1, got {}",
            2.0 * lambda * c1
        )));
    }
    if !(c2 > 0.0) {
        return Err(Error::NonpositiveRate(c2));
    }
    let first = 4.0 * gamma1_sq * c1 * c1 / (2.0 * lambda * c1 - 1.0);
    Ok(two_term(first, gamma2_sq, beta1, lambda, c2) / t)
}

/// `β^x`, exactly 1 inside the limit band.
fn beta_pow(beta: f64, x: f64) -> f64 {
    if x.abs() <= LIMIT_TAU {
        1.0
    } else {
        (x * beta.ln()).exp()
    }
}

/// `(1 − β^x)/x`, continued by `ln(1/β)` inside the limit band.
fn mixing(beta: f64, x: f64) -> f64 {
    if x.abs() <= LIMIT_TAU {
        -beta.ln()
    } else {
        -(x * beta.ln()).exp_m1() / x
    }
}

fn two_term(first: f64, gamma2_sq: f64, beta1: f64, lambda: f64, c2: f64) -> f64 {
    let x = 2.0 * lambda * c2 - 1.0;
    first * beta_pow(beta1, x) + 4.0 * gamma2_sq * c2 * c2 * mixing(beta1, x)
}

/// Which source is consumed first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataOrder {
    CleanFirst,
    NoisyFirst,
}

/// Noise levels of the clean and noisy sources and the clean fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceNoise {
    pub gamma_c_sq: f64,
    pub gamma_n_sq: f64,
    pub beta_c: f64,
    pub lambda: f64,
}

impl SourceNoise {
    pub fn new(gamma_c_sq: f64, gamma_n_sq: f64, beta_c: f64, lambda: f64) -> Result<Self> {
        let s = Self {
            gamma_c_sq,
            gamma_n_sq,
            beta_c,
            lambda,
        };
        s.inputs(DataOrder::CleanFirst, 1.0)?;
        Ok(s)
    }

    /// Bound inputs for the given order over `t` total steps.
    pub fn inputs(&self, order: DataOrder, t: f64) -> Result<BoundInputs> {
        match order {
            DataOrder::CleanFirst => {
                BoundInputs::new(self.gamma_c_sq, self.gamma_n_sq, self.beta_c, self.lambda, t)
            }
            DataOrder::NoisyFirst => BoundInputs::new(
                self.gamma_n_sq,
                self.gamma_c_sq,
                1.0 - self.beta_c,
                self.lambda,
                t,
            ),
        }
    }

    /// `H_CN(c) = 4Γ_C²β_Cˣ/λ² + 4Γ_N²(1 − β_Cˣ)c²/x` with `x = 2λc − 1`.
    pub fn h_cn(&self, c: f64) -> f64 {
        h(self.gamma_c_sq, self.gamma_n_sq, self.beta_c, self.lambda, c)
    }

    /// `H_NC`: `H_CN` with the roles of the two sources swapped.
    pub fn h_nc(&self, c: f64) -> f64 {
        h(self.gamma_n_sq, self.gamma_c_sq, 1.0 - self.beta_c, self.lambda, c)
    }

    pub fn h(&self, order: DataOrder, c: f64) -> f64 {
        match order {
            DataOrder::CleanFirst => self.h_cn(c),
            DataOrder::NoisyFirst => self.h_nc(c),
        }
    }

    /// `4Γ_C²/(λ²β_C)`: the homogeneous bound using clean data only.
    pub fn clean_only_bound(&self) -> f64 {
        4.0 * self.gamma_c_sq / (self.lambda * self.lambda * self.beta_c)
    }
}

fn h(g1: f64, g2: f64, beta1: f64, lambda: f64, c: f64) -> f64 {
    two_term(4.0 * g1 / (lambda * lambda), g2, beta1, lambda, c)
}

/// Minimiser of a bound curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct C2Minimum {
    pub c2: f64,
    pub value: f64,
    pub at_boundary: bool,
}

/// Minimises `B(1/λ, c₂)` over `c₂ ∈ [10⁻⁶/λ, 10³/λ]`.
pub fn minimize_c2(inputs: &BoundInputs) -> Result<C2Minimum> {
    inputs.validate()?;
    // With c₁ = 1/λ the first coefficient is 4Γ₁²/λ².
    let first = 4.0 * inputs.gamma1_sq / (inputs.lambda * inputs.lambda);
    let f = |c2: f64| two_term(first, inputs.gamma2_sq, inputs.beta1, inputs.lambda, c2) / inputs.t;
    let r = grid_then_golden(
        f,
        C2_MIN_FACTOR / inputs.lambda,
        C2_MAX_FACTOR / inputs.lambda,
        GRID_POINTS,
        GOLDEN_REL_TOL,
    );
    if r.at_boundary {
        warn!(
            "c2 minimiser {:.3e} sits at the edge of the search domain (λc2 = {:.3e})",
            r.x,
            r.x * inputs.lambda
        );
    }
    Ok(C2Minimum {
        c2: r.x,
        value: r.value,
        at_boundary: r.at_boundary,
    })
}

/// Minimises `B(c, c)` over `c ∈ (1/(2λ), 10³/λ]`: the best single rate for
/// both phases in the given order.
pub fn minimize_single_rate(inputs: &BoundInputs) -> Result<C2Minimum> {
    inputs.validate()?;
    let lambda = inputs.lambda;
    let f = |c: f64| bound_b(inputs, c, c).unwrap_or(f64::INFINITY);
    let r = grid_then_golden(
        f,
        0.5 / lambda * (1.0 + 1e-6),
        C2_MAX_FACTOR / lambda,
        GRID_POINTS,
        GOLDEN_REL_TOL,
    );
    Ok(C2Minimum {
        c2: r.x,
        value: r.value,
        at_boundary: r.at_boundary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionDiagnostics {
    pub c_cn: f64,
    pub h_cn: f64,
    pub c_nc: f64,
    pub h_nc: f64,
}

/// Chosen order and phase rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSelection {
    pub order: DataOrder,
    pub c1: f64,
    pub c2: f64,
    pub bound_value: f64,
    pub diagnostics: SelectionDiagnostics,
}

impl RateSelection {
    /// Rate constant used for the clean and the noisy phase respectively.
    pub fn clean_noisy_rates(&self) -> (f64, f64) {
        match self.order {
            DataOrder::CleanFirst => (self.c1, self.c2),
            DataOrder::NoisyFirst => (self.c2, self.c1),
        }
    }
}

/// Relative slack under which `H_CN` and `H_NC` minima count as equal; ties go
/// to clean-first.
pub const ORDER_TIE_TOLERANCE: f64 = 1e-12;

/// Minimises `H_CN` and `H_NC` and keeps the smaller, with `c₁ = 1/λ`.
pub fn algorithm2_select(noise: &SourceNoise) -> Result<RateSelection> {
    let cn = minimize_c2(&noise.inputs(DataOrder::CleanFirst, 1.0)?)?;
    let nc = minimize_c2(&noise.inputs(DataOrder::NoisyFirst, 1.0)?)?;
    let diagnostics = SelectionDiagnostics {
        c_cn: cn.c2,
        h_cn: cn.value,
        c_nc: nc.c2,
        h_nc: nc.value,
    };
    let (order, best) = if cn.value <= nc.value * (1.0 + ORDER_TIE_TOLERANCE) {
        (DataOrder::CleanFirst, cn)
    } else {
        (DataOrder::NoisyFirst, nc)
    };
    Ok(RateSelection {
        order,
        c1: 1.0 / noise.lambda,
        c2: best.c2,
        bound_value: best.value,
        diagnostics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalRegime {
    NoisyFirst,
    CleanFirst,
}

/// Analytic bracket for `2λc₂*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaInterval {
    pub lo: f64,
    pub hi: f64,
    pub regime: IntervalRegime,
    /// The bracket's hypothesis `Γ_N > Γ_C` holds. The bracket is asymptotic
    /// in `Γ_N/Γ_C` and only reported, never enforced.
    pub valid: bool,
}

impl LemmaInterval {
    pub fn contains(&self, two_lambda_c2: f64) -> bool {
        self.lo <= two_lambda_c2 && two_lambda_c2 <= self.hi
    }

    /// The bracket as rate constants `c₂`.
    pub fn c2_range(&self, lambda: f64) -> (f64, f64) {
        (self.lo / (2.0 * lambda), self.hi / (2.0 * lambda))
    }
}

/// Noisy-first bracket, with `r = Γ_N/Γ_C` and `L = ln(1/β_N)`:
/// `2λc₂* ∈ [1 + (2 ln r + ln L)/L, 1 + (2 ln 4r + ln L)/L]`.
pub fn lemma2_interval(gamma_c_sq: f64, gamma_n_sq: f64, beta_n: f64, _lambda: f64) -> Result<LemmaInterval> {
    if !(beta_n > 0.0 && beta_n < 1.0) {
        return Err(Error::Domain(format!(
            "ln ln(1/β_N) is undefined for β_N = {beta_n}"
        )));
    }
    if !(gamma_c_sq > 0.0 && gamma_n_sq > 0.0) {
        return Err(Error::InvalidParameter("noise levels must be positive".into()));
    }
    let ln_ratio = 0.5 * (gamma_n_sq / gamma_c_sq).ln();
    let l = -beta_n.ln();
    let ll = l.ln();
    Ok(LemmaInterval {
        lo: 1.0 + (2.0 * ln_ratio + ll) / l,
        hi: 1.0 + (2.0 * (4f64.ln() + ln_ratio) + ll) / l,
        regime: IntervalRegime::NoisyFirst,
        valid: gamma_n_sq > gamma_c_sq,
    })
}

/// Clean-first bracket, with `σ = (Γ_N/Γ_C)⁻²`: `2λc₂* ∈ [σ, 8σ/β_C]`.
pub fn lemma3_interval(gamma_c_sq: f64, gamma_n_sq: f64, beta_c: f64) -> Result<LemmaInterval> {
    if !(beta_c > 0.0 && beta_c < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta_c must lie in (0, 1), got {beta_c}"
        )));
    }
    if !(gamma_c_sq > 0.0 && gamma_n_sq > 0.0) {
        return Err(Error::InvalidParameter("noise levels must be positive".into()));
    }
    let sigma = gamma_c_sq / gamma_n_sq;
    Ok(LemmaInterval {
        lo: sigma,
        hi: 8.0 * sigma / beta_c,
        regime: IntervalRegime::CleanFirst,
        valid: gamma_n_sq > gamma_c_sq,
    })
}

/// Outcome of the empirical line search between the two selections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalSearch {
    pub c2_best: f64,
    pub value: f64,
    /// Selection with lower-bound noise levels, giving `c₂(L)`.
    pub lower: RateSelection,
    /// Selection with upper-bound noise levels, giving `c₂(U)`.
    pub upper: RateSelection,
    pub evaluations: usize,
}

/// Runs the selector with upper and with lower noise levels and line-searches
/// `evaluate` (e.g. a Monte Carlo objective) over `c₂` between the two
/// answers using `budget` evaluations. A degenerate interval returns its
/// single point without calling `evaluate` (the value is then NaN).
pub fn c2_interval_search<F: FnMut(f64) -> f64>(
    upper: &SourceNoise,
    lower: &SourceNoise,
    budget: usize,
    evaluate: F,
) -> Result<IntervalSearch> {
    if lower.gamma_c_sq > upper.gamma_c_sq || lower.gamma_n_sq > upper.gamma_n_sq {
        return Err(Error::PreconditionViolated(
            "lower noise levels must not exceed upper noise levels".into(),
        ));
    }
    let su = algorithm2_select(upper)?;
    let sl = algorithm2_select(lower)?;
    let (lo, hi) = if su.c2 <= sl.c2 { (su.c2, sl.c2) } else { (sl.c2, su.c2) };
    if hi - lo <= 1e-12 * hi {
        return Ok(IntervalSearch {
            c2_best: su.c2,
            value: f64::NAN,
            lower: sl,
            upper: su,
            evaluations: 0,
        });
    }
    let (c2_best, value, evaluations) = golden_budgeted(evaluate, lo, hi, budget);
    Ok(IntervalSearch {
        c2_best,
        value,
        lower: sl,
        upper: su,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn homogeneous_value() {
        let (g, lambda, t) = (3.0, 0.2, 100.0);
        let inp = BoundInputs::new(g, g, 0.3, lambda, t).unwrap();
        let v = bound_b(&inp, 1.0 / lambda, 1.0 / lambda).unwrap();
        assert!(rel(v, 4.0 * g / (lambda * lambda * t)) < 1e-13);
        let s = SourceNoise::new(g, g, 0.3, lambda).unwrap();
        assert!(rel(s.h_cn(1.0 / lambda), 4.0 * g / (lambda * lambda)) < 1e-13);
    }

    #[test]
    fn reference_value() {
        let inp = BoundInputs::new(17.0, 2604.0, 0.1, 1e-3, 1e4).unwrap();
        assert!(rel(bound_b(&inp, 1000.0, 1000.0).unwrap(), 938_120.0) < 1e-10);
    }

    #[test]
    fn precondition() {
        let inp = BoundInputs::new(1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        assert!(matches!(bound_b(&inp, 0.5, 1.0), Err(Error::PreconditionViolated(_))));
        assert!(bound_b(&inp, 0.51, 1.0).is_ok());
        assert!(BoundInputs::new(1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn equal_noise_picks_inverse_lambda() {
        let inp = BoundInputs::new(3.0, 3.0, 0.3, 0.01, 1.0).unwrap();
        let m = minimize_c2(&inp).unwrap();
        assert!(rel(m.c2, 100.0) < 1e-6);
        let s = algorithm2_select(&SourceNoise::new(3.0, 3.0, 0.3, 0.01).unwrap()).unwrap();
        assert_eq!(s.order, DataOrder::CleanFirst);
    }

    #[test]
    fn lemma_hand_values() {
        let l2 = lemma2_interval(1.0, 1e4, 0.9, 1.0).unwrap();
        assert!((l2.lo - 67.06).abs() < 0.01 && (l2.hi - 93.37).abs() < 0.01);
        assert!(l2.valid);
        assert!(lemma2_interval(1.0, 1e4, 1.0, 1.0).is_err());
        let l3 = lemma3_interval(1.0, 100.0, 0.1).unwrap();
        assert!(rel(l3.lo, 0.01) < 1e-14 && rel(l3.hi, 0.8) < 1e-14);
    }

    #[test]
    fn degenerate_search_skips_callback() {
        let s = SourceNoise::new(4.0, 7.0, 0.2, 0.1).unwrap();
        let r = c2_interval_search(&s, &s, 12, |_| panic!("must not be called")).unwrap();
        assert_eq!(r.evaluations, 0);
        assert_eq!(r.c2_best, r.upper.c2);
    }
}
