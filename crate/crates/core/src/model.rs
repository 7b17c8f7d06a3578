//! Domain types shared by every other module: labelled examples, model
//! vectors, the regularized objective with its per-example losses, and
//! Euclidean-ball projection.
//!
//! All functions here are pure. The per-example gradient of every supported
//! loss has the form `ℓ'(y·wᵀx) · y · x`, so losses are described by their
//! scalar derivative in the margin and the vector part is shared.

use std::fmt;
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary label in {−1, +1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Neg => -1.0,
            Label::Pos => 1.0,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Neg => Label::Pos,
            Label::Pos => Label::Neg,
        }
    }

    pub fn from_sign(v: f64) -> Label {
        if v < 0.0 {
            Label::Neg
        } else {
            Label::Pos
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Neg => f.write_str("-1"),
            Label::Pos => f.write_str("+1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub x: Vec<f64>,
    pub y: Label,
}

impl LabeledExample {
    pub fn new(x: Vec<f64>, y: Label) -> Self {
        Self { x, y }
    }
}

/// A collection of examples sharing one feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    examples: Vec<LabeledExample>,
}

impl Dataset {
    pub fn new(dim: usize, examples: Vec<LabeledExample>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dataset dimension must be ≥ 1".into()));
        }
        if let Some(bad) = examples.iter().find(|e| e.x.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.x.len(),
            });
        }
        Ok(Self { dim, examples })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledExample> {
        self.examples.iter()
    }

    pub fn get(&self, i: usize) -> Option<&LabeledExample> {
        self.examples.get(i)
    }

    pub fn max_norm(&self) -> f64 {
        self.examples
            .iter()
            .map(|e| norm(&e.x))
            .fold(0.0, f64::max)
    }

    /// Rescales every feature vector by the largest norm in the dataset, so
    /// that afterwards `‖x‖ ≤ 1` for every example (with equality for the
    /// longest one). A dataset of all-zero vectors is left unchanged.
    pub fn normalize(&mut self) {
        let m = self.max_norm();
        if m > 0.0 {
            for e in &mut self.examples {
                e.x.iter_mut().for_each(|v| *v /= m);
            }
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// Splits off the first `n` examples; returns `(first n, rest)`.
    pub fn split_at(&self, n: usize) -> (Dataset, Dataset) {
        let n = n.min(self.len());
        let (a, b) = self.examples.split_at(n);
        (
            Dataset {
                dim: self.dim,
                examples: a.to_vec(),
            },
            Dataset {
                dim: self.dim,
                examples: b.to_vec(),
            },
        )
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a LabeledExample;
    type IntoIter = std::slice::Iter<'a, LabeledExample>;

    fn into_iter(self) -> Self::IntoIter {
        self.examples.iter()
    }
}

/// A dense parameter vector `w`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModelVector(Vec<f64>);

impl ModelVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn distance(&self, other: &ModelVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl From<Vec<f64>> for ModelVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Deref for ModelVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ModelVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// The per-example loss gradient `∇ℓ(w, x, y)`, without the `λw` term.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGradient(pub Vec<f64>);

impl LossGradient {
    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl Deref for LossGradient {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// `log(1 + e^{−y wᵀx})`
    Logistic,
    /// `max(0, 1 − y wᵀx)`
    Hinge,
    /// `−y wᵀx`
    Linear,
}

impl Loss {
    /// Loss as a function of the margin `m = y wᵀx`.
    pub fn value_at_margin(self, m: f64) -> f64 {
        match self {
            // log(1 + e^{-m}) without overflow for large |m|
            Loss::Logistic => {
                if m > 0.0 {
                    (-m).exp().ln_1p()
                } else {
                    -m + m.exp().ln_1p()
                }
            }
            Loss::Hinge => (1.0 - m).max(0.0),
            Loss::Linear => -m,
        }
    }

    /// Derivative of the loss with respect to the margin. The hinge kink at
    /// `m = 1` takes the active branch.
    pub fn derivative_at_margin(self, m: f64) -> f64 {
        match self {
            Loss::Logistic => -sigmoid(-m),
            Loss::Hinge => {
                if m <= 1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Loss::Linear => -1.0,
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Loss::Logistic => "logistic",
            Loss::Hinge => "hinge",
            Loss::Linear => "linear",
        })
    }
}

/// `f(w) = λ/2 ‖w‖² + mean ℓ(w, xᵢ, yᵢ)` over the ball `‖w‖ ≤ radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub lambda: f64,
    pub loss: Loss,
    pub radius: f64,
}

impl ObjectiveSpec {
    /// Objective with the default feasible radius `1/λ`.
    pub fn new(lambda: f64, loss: Loss) -> Result<Self> {
        Self::with_radius(lambda, loss, 1.0 / lambda)
    }

    /// `radius = f64::INFINITY` disables projection.
    pub fn with_radius(lambda: f64, loss: Loss, radius: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            lambda,
            loss,
            radius,
        })
    }

    pub fn loss_value(&self, w: &ModelVector, ex: &LabeledExample) -> Result<f64> {
        check_dim(w.len(), ex.x.len())?;
        Ok(self.loss.value_at_margin(ex.y.sign() * dot(w, &ex.x)))
    }

    pub fn loss_gradient(&self, w: &ModelVector, ex: &LabeledExample) -> Result<LossGradient> {
        check_dim(w.len(), ex.x.len())?;
        let y = ex.y.sign();
        let coef = self.loss.derivative_at_margin(y * dot(w, &ex.x)) * y;
        Ok(LossGradient(ex.x.iter().map(|v| coef * v).collect()))
    }

    pub fn full_objective(&self, w: &ModelVector, data: &Dataset) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        check_dim(w.len(), data.dim())?;
        let total: f64 = data
            .iter()
            .map(|ex| self.loss.value_at_margin(ex.y.sign() * dot(w, &ex.x)))
            .sum();
        Ok(0.5 * self.lambda * dot(w, w) + total / data.len() as f64)
    }
}

/// Projection onto `{w : ‖w‖ ≤ radius}`.
pub fn project(w: &ModelVector, radius: f64) -> ModelVector {
    let mut out = w.clone();
    project_in_place(&mut out, radius);
    out
}

pub(crate) fn project_in_place(w: &mut [f64], radius: f64) {
    let n = norm(w);
    if n > radius {
        let s = radius / n;
        w.iter_mut().for_each(|v| *v *= s);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
