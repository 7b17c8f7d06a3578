//! Seeded sign random projections.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Dataset, LabeledExample};

/// A `d_out × d_in` matrix with i.i.d. entries `±1/√d_out`, or the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomProjection {
    d_in: usize,
    d_out: usize,
    /// Row-major; `None` for the identity.
    matrix: Option<Vec<f64>>,
}

impl RandomProjection {
    pub fn new(d_in: usize, d_out: usize, seed: u64) -> Result<Self> {
        if d_out == 0 || d_out > d_in {
            return Err(Error::InvalidParameter(format!(
                "projection needs 1 ≤ d_out ≤ d_in (d_in={d_in}, d_out={d_out})"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = 1.0 / (d_out as f64).sqrt();
        let matrix = (0..d_in * d_out)
            .map(|_| if rng.gen::<bool>() { s } else { -s })
            .collect();
        Ok(Self {
            d_in,
            d_out,
            matrix: Some(matrix),
        })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            d_in: d,
            d_out: d,
            matrix: None,
        }
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match &self.matrix {
            None => x.to_vec(),
            Some(m) => m
                .chunks_exact(self.d_in)
                .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
                .collect(),
        }
    }

    /// Projects every example and renormalizes to `max ‖x‖ = 1`.
    pub fn project_dataset(&self, data: &Dataset) -> Result<Dataset> {
        if data.dim() != self.d_in {
            return Err(Error::DimensionMismatch {
                expected: self.d_in,
                found: data.dim(),
            });
        }
        let examples = data
            .iter()
            .map(|ex| LabeledExample::new(self.apply(&ex.x), ex.y))
            .collect();
        Ok(Dataset::new(self.d_out, examples)?.normalized())
    }
}

pub fn random_projection(data: &Dataset, d_out: usize, seed: u64) -> Result<Dataset> {
    RandomProjection::new(data.dim(), d_out, seed)?.project_dataset(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Label;

    #[test]
    fn identity_only_normalizes() {
        let ds = Dataset::new(
            2,
            vec![
                LabeledExample::new(vec![0.5, 0.0], Label::Pos),
                LabeledExample::new(vec![0.0, 0.25], Label::Neg),
            ],
        )
        .unwrap();
        let out = RandomProjection::identity(2).project_dataset(&ds).unwrap();
        assert_eq!(out, ds.normalized());
    }

    #[test]
    fn deterministic_and_sized() {
        let a = RandomProjection::new(30, 5, 2).unwrap();
        let b = RandomProjection::new(30, 5, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.apply(&[1.0; 30]).len(), 5);
        assert!(RandomProjection::new(3, 5, 0).is_err());
    }
}
