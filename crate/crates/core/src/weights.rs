//! Named, normalized portfolio allocations.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("asset list is empty")]
    Empty,
    #[error("asset/weight length mismatch: {assets} vs {weights}")]
    LengthMismatch { assets: usize, weights: usize },
    #[error("weight {value} for {ticker} is negative")]
    Negative { ticker: String, value: f64 },
    #[error("weights sum to {0}, expected 1")]
    NotNormalized(f64),
}

/// A portfolio allocation: non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub assets: Vec<String>,
    pub weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(assets: Vec<String>, weights: Vec<f64>) -> Result<Self, WeightError> {
        if assets.is_empty() {
            return Err(WeightError::Empty);
        }
        if assets.len() != weights.len() {
            return Err(WeightError::LengthMismatch {
                assets: assets.len(),
                weights: weights.len(),
            });
        }
        for (a, &w) in assets.iter().zip(&weights) {
            if w < 0.0 || !w.is_finite() {
                return Err(WeightError::Negative {
                    ticker: a.clone(),
                    value: w,
                });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(WeightError::NotNormalized(sum));
        }
        Ok(WeightVector { assets, weights })
    }

    /// Long-short allocations (tangency with shorts) skip the non-negativity
    /// check but still must sum to one.
    pub fn new_allow_shorts(assets: Vec<String>, weights: Vec<f64>) -> Result<Self, WeightError> {
        if assets.is_empty() {
            return Err(WeightError::Empty);
        }
        if assets.len() != weights.len() {
            return Err(WeightError::LengthMismatch {
                assets: assets.len(),
                weights: weights.len(),
            });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(WeightError::NotNormalized(sum));
        }
        Ok(WeightVector { assets, weights })
    }

    pub fn len(&self) -> usize {
        self.assets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }

    /// (ticker, weight) pairs sorted by descending weight, ties by ticker.
    pub fn sorted_descending(&self) -> Vec<(&str, f64)> {
        let mut pairs: Vec<(&str, f64)> = self
            .assets
            .iter()
            .map(String::as_str)
            .zip(self.weights.iter().copied())
            .collect();
        pairs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(b.0)));
        pairs
    }
}
