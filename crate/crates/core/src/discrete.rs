//! Discrete conditionals and marginals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A discrete conditional `P(output | input)` stored as a column-stochastic
/// matrix: entry `(row, col)` is the probability of output state `row` given
/// input state `col`, and every column sums to one within `1e-12`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>, // row-major
}

impl StochasticMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "matrix shape {rows}x{cols} does not match {} entries",
                entries.len()
            )));
        }
        if entries.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument(
                "matrix entries must lie in [0, 1]".into(),
            ));
        }
        for c in 0..cols {
            let s: f64 = (0..rows).map(|r| entries[r * cols + c]).sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "column {c} sums to {s}, expected 1"
                )));
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Builds the matrix from columns (one per input state).
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        if cols == 0 {
            return Err(Error::InvalidArgument("no columns".into()));
        }
        let rows = columns[0].len();
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidArgument("ragged columns".into()));
        }
        let mut entries = vec![0.0; rows * cols];
        for (c, col) in columns.iter().enumerate() {
            for (r, &p) in col.iter().enumerate() {
                entries[r * cols + c] = p;
            }
        }
        StochasticMatrix::new(rows, cols, entries)
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        StochasticMatrix::new(n, n, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `P(output = row | input = col)`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Pushes an input distribution forward: `q = M p`.
    pub fn apply(&self, p: &DiscreteDistribution) -> Result<DiscreteDistribution> {
        if p.len() != self.cols {
            return Err(Error::InvalidArgument(format!(
                "distribution has {} states, matrix expects {}",
                p.len(),
                self.cols
            )));
        }
        let q: Vec<f64> = (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| self.get(r, c) * p.probs()[c])
                    .sum::<f64>()
            })
            .collect();
        DiscreteDistribution::new(q)
    }
}

/// A probability vector: non-negative entries summing to one within `1e-12`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty distribution".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidArgument(
                "probabilities must be finite and non-negative".into(),
            ));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {s}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Normalizes arbitrary non-negative weights into a distribution.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let s: f64 = weights.iter().sum();
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::InvalidArgument("weights must have positive sum".into()));
        }
        let probs = weights.into_iter().map(|w| w / s).collect();
        DiscreteDistribution::new(probs)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // len >= 1 by construction
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_must_be_stochastic() {
        assert!(StochasticMatrix::from_columns(&[vec![0.9, 0.2]]).is_err());
        assert!(StochasticMatrix::from_columns(&[vec![0.9, 0.1], vec![0.2, 0.8]]).is_ok());
    }

    #[test]
    fn forward_application_matches_hand_product() {
        let m = StochasticMatrix::from_columns(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let p = DiscreteDistribution::new(vec![0.5, 0.5]).unwrap();
        let q = m.apply(&p).unwrap();
        assert!((q.probs()[0] - 0.55).abs() < 1e-15);
        assert!((q.probs()[1] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn distribution_must_sum_to_one() {
        assert!(DiscreteDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(DiscreteDistribution::new(vec![0.5, 0.5]).is_ok());
    }
}
