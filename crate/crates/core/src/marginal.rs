use alloc::string::String;
use alloc::vec::Vec;

use crate::error::bail;
use crate::{CoreError, Result, MAX_DIMENSION, PROBABILITY_TOL};

/// Probability vector on a finite space.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginal {
    weights: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl Marginal {
    /// Validates nonnegativity and `Σ w = 1` within [`PROBABILITY_TOL`].
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(weights, PROBABILITY_TOL)
    }

    /// Like [`Marginal::new`] with an explicit tolerance on the total mass,
    /// for marginals read off solver output.
    pub fn with_tolerance(weights: Vec<f64>, tol: f64) -> Result<Self> {
        if weights.is_empty() {
            bail!(InvalidMarginal, "a marginal needs at least one point");
        }
        if weights.len() > MAX_DIMENSION {
            return Err(CoreError::TooLarge(weights.len()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            bail!(InvalidMarginal, "weight {i} = {w} is not a finite nonnegative real");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol {
            bail!(InvalidMarginal, "weights sum to {total}, not 1");
        }
        Ok(Self { weights, labels: None })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            bail!(InvalidMarginal, "a marginal needs at least one point");
        }
        Self::new(alloc::vec![1.0 / n as f64; n])
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.weights.len() {
            bail!(InvalidMarginal, "{} labels for {} points", labels.len(), self.weights.len());
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}
