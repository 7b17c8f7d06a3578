//! JSON experiment configuration. Unknown keys are rejected; omitted keys
//! take the desk-scale defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Loss;
use crate::oracle::OracleKind;

use super::synthetic::SyntheticSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub lambda: f64,
    pub loss: Loss,
    /// Feasible radius; `1/λ` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Synthetic {
        d: usize,
        n: usize,
        #[serde(default)]
        flip_rate: f64,
    },
    Csv {
        path: PathBuf,
    },
    Libsvm {
        path: PathBuf,
    },
}

impl DataSource {
    pub fn synthetic_spec(&self) -> Option<SyntheticSpec> {
        match *self {
            DataSource::Synthetic { d, n, flip_rate } => Some(SyntheticSpec { d, n, flip_rate }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub kind: OracleKind,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
}

fn default_batch() -> usize {
    50
}

/// Strategies for the three experiments. The first five are compared by
/// `strategy-cmp`; the order strategies are used by `order-exp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Noiseless gradients over all data with `c = 1/λ`.
    Optimal,
    /// Clean data only with `c = 1/λ`.
    CleanOnly,
    /// Clean first, one rate for both phases chosen by the bound.
    SameClean,
    /// Noisy first, one rate for both phases chosen by the bound.
    SameNoisy,
    /// Order and two rates chosen by the bound.
    Algorithm2,
    #[serde(rename = "cf")]
    CleanFirst,
    #[serde(rename = "nf")]
    NoisyFirst,
    #[serde(rename = "ao")]
    ArbitraryOrder,
}

impl Strategy {
    pub const COMPARISON: [Strategy; 5] = [
        Strategy::Optimal,
        Strategy::CleanOnly,
        Strategy::SameClean,
        Strategy::SameNoisy,
        Strategy::Algorithm2,
    ];
    pub const ORDERS: [Strategy; 3] = [Strategy::CleanFirst, Strategy::NoisyFirst, Strategy::ArbitraryOrder];

    pub fn is_order(self) -> bool {
        Self::ORDERS.contains(&self)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Optimal => "Optimal",
            Strategy::CleanOnly => "CleanOnly",
            Strategy::SameClean => "SameClean",
            Strategy::SameNoisy => "SameNoisy",
            Strategy::Algorithm2 => "Algorithm2",
            Strategy::CleanFirst => "CF",
            Strategy::NoisyFirst => "NF",
            Strategy::ArbitraryOrder => "AO",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub objective: ObjectiveConfig,
    pub data: DataSource,
    /// Randomly project features to this dimension before splitting.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection_dim: Option<usize>,
    /// Fraction of examples assigned to the clean source.
    pub beta_c: f64,
    pub clean: OracleConfig,
    pub noisy: OracleConfig,
    pub strategies: Vec<Strategy>,
    pub trials: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Rate constants for `order-exp`, as multiples of `1/λ`.
    pub c_grid: Vec<f64>,
    /// Noise parameter of the noisy source (ε for local DP, σ for label
    /// noise, `E‖Z‖²` for Gaussian) for `strategy-cmp` and `c2-sweep`.
    pub noisy_sweep: Vec<f64>,
    /// `c₂` values for `c2-sweep` as multiples of `1/λ`; derived from the
    /// bound brackets when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c2_grid: Option<Vec<f64>>,
    /// Number of derived `c₂` grid points per order.
    pub c2_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Write measured wall time in the CSV `seconds` column. Off by default
    /// so that result files are byte-reproducible.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            objective: ObjectiveConfig {
                lambda: 1e-3,
                loss: Loss::Logistic,
                radius: None,
            },
            data: DataSource::Synthetic {
                d: 10,
                n: 5000,
                flip_rate: 0.1,
            },
            projection_dim: None,
            beta_c: 0.1,
            clean: OracleConfig {
                kind: OracleKind::LocalDp { epsilon: 10.0 },
                batch_size: 50,
            },
            noisy: OracleConfig {
                kind: OracleKind::LocalDp { epsilon: 2.0 },
                batch_size: 50,
            },
            strategies: Strategy::COMPARISON.to_vec(),
            trials: 100,
            master_seed: 1,
            output_dir: PathBuf::from("results"),
            c_grid: vec![0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0],
            noisy_sweep: vec![1.0, 2.0, 3.0, 5.0, 8.0, 10.0],
            c2_grid: None,
            c2_points: 15,
            threads: None,
            record_timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.trials == 0 {
            return bad("trials must be ≥ 1".into());
        }
        if !(self.beta_c > 0.0 && self.beta_c < 1.0) {
            return bad(format!("beta_c must lie in (0, 1), got {}", self.beta_c));
        }
        if !(self.objective.lambda > 0.0) {
            return bad(format!("lambda must be positive, got {}", self.objective.lambda));
        }
        if self.clean.batch_size == 0 || self.noisy.batch_size == 0 {
            return bad("batch sizes must be ≥ 1".into());
        }
        self.clean.kind.validate()?;
        self.noisy.kind.validate()?;
        if self.c_grid.iter().any(|&c| !(c > 0.0)) {
            return bad("c_grid entries must be positive".into());
        }
        if let Some(g) = &self.c2_grid {
            if g.is_empty() || g.iter().any(|&c| !(c > 0.0)) {
                return bad("c2_grid must be nonempty with positive entries".into());
            }
        }
        if self.threads == Some(0) {
            return bad("threads must be ≥ 1".into());
        }
        Ok(())
    }
}

/// Replaces the noise parameter of `kind` with `value`.
pub fn with_noise_param(kind: OracleKind, value: f64) -> OracleKind {
    match kind {
        OracleKind::Clean => OracleKind::Clean,
        OracleKind::LocalDp { .. } => OracleKind::LocalDp { epsilon: value },
        OracleKind::Rcn { .. } => OracleKind::Rcn { sigma: value },
        OracleKind::Gaussian { .. } => OracleKind::Gaussian {
            second_moment: value,
        },
    }
}
