//! Stochastic gradient descent over gradient oracles whose noise level
//! depends on the data source.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: examples, datasets, losses, the regularized objective and
//!   projection onto the feasible ball.
//! - [`oracle`]: noisy gradient oracles (clean, local differential privacy,
//!   random classification noise) with budgets and mini-batching.
//! - [`sgd`]: projected SGD over phased or interleaved oracle schedules,
//!   including noisy/noiseless paired runs.
//! - [`ordering`]: the `Δ_t` weights and the closed-form deviation that decide
//!   whether clean or noisy data should come first.
//! - [`rates`]: the two-phase regret bound, its minimisation, the rate and
//!   order selection procedure, analytic brackets and the interval line search.
//! - [`harness`]: data generation and ingestion, experiments, CSV output and
//!   configuration used by the command-line tool.

// Parameter checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod ordering;
pub mod rates;
pub mod sgd;

pub use error::{Error, Result};
pub use model::{project, Dataset, Label, LabeledExample, Loss, LossGradient, ModelVector, ObjectiveSpec};
pub use oracle::{NoiseLevel, Oracle, OracleCallRecord, OracleKind, OracleSpec};
