//! Benchmark allocation strategies: equal weight and maximum Sharpe ratio
//! (unconstrained tangency and long-only active-set variants).

use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

use crate::marketdata::ReturnMatrix;
use crate::weights::{WeightError, WeightVector};

#[derive(Debug, Error)]
pub enum AllocError {
    #[error("asset list is empty")]
    EmptyUniverse,
    #[error("expected returns length {mu} does not match covariance size {cov}")]
    DimensionMismatch { mu: usize, cov: usize },
    #[error("covariance is not positive definite (Cholesky failed even after ridge up to {max_ridge:e})")]
    NotPositiveDefinite { max_ridge: f64 },
    #[error("degenerate portfolio: normalizer 1' Sigma^-1 (mu - rf) is zero")]
    ZeroNormalizer,
    #[error(transparent)]
    Weight(#[from] WeightError),
}

/// Annualized expected returns per asset (fraction/year).
#[derive(Debug, Clone)]
pub struct ExpectedReturns {
    pub assets: Vec<String>,
    pub mu: DVector<f64>,
}

/// Historical-mean estimator: periods_per_year times the mean daily log return.
pub fn mean_returns(returns: &ReturnMatrix, periods_per_year: f64) -> ExpectedReturns {
    let t_len = returns.n_periods() as f64;
    let mu = DVector::from_fn(returns.n_assets(), |i, _| {
        periods_per_year * returns.values.column(i).sum() / t_len
    });
    ExpectedReturns {
        assets: returns.assets.clone(),
        mu,
    }
}

/// The 1/N benchmark.
pub fn equal_weight(assets: &[String]) -> Result<WeightVector, AllocError> {
    if assets.is_empty() {
        return Err(AllocError::EmptyUniverse);
    }
    let w = 1.0 / assets.len() as f64;
    Ok(WeightVector::new(
        assets.to_vec(),
        vec![w; assets.len()],
    )?)
}

/// Cholesky factorization with escalating ridge repair. The ridge starts at
/// 1e-8 * trace/N and grows tenfold up to 1e-4 * trace/N before giving up.
fn cholesky_with_ridge(cov: &DMatrix<f64>) -> Result<Cholesky<f64, nalgebra::Dyn>, AllocError> {
    if let Some(chol) = Cholesky::new(cov.clone()) {
        return Ok(chol);
    }
    let n = cov.nrows();
    let scale = cov.trace() / n as f64;
    let mut eps = 1e-8;
    while eps <= 1e-4 {
        let ridged = cov + DMatrix::identity(n, n).scale(eps * scale);
        if let Some(chol) = Cholesky::new(ridged) {
            return Ok(chol);
        }
        eps *= 10.0;
    }
    Err(AllocError::NotPositiveDefinite {
        max_ridge: 1e-4 * scale,
    })
}

/// Closed-form tangency portfolio w = Sigma^-1 (mu - rf) / 1' Sigma^-1 (mu - rf),
/// solved via Cholesky rather than an explicit inverse. Weights may be negative.
pub fn tangency_weights(
    mu: &ExpectedReturns,
    cov: &DMatrix<f64>,
    rf: f64,
) -> Result<WeightVector, AllocError> {
    let n = cov.nrows();
    if mu.mu.len() != n {
        return Err(AllocError::DimensionMismatch {
            mu: mu.mu.len(),
            cov: n,
        });
    }
    if n == 0 {
        return Err(AllocError::EmptyUniverse);
    }
    let excess = &mu.mu - DVector::from_element(n, rf);
    let chol = cholesky_with_ridge(cov)?;
    let x = chol.solve(&excess);
    let s: f64 = x.sum();
    if s.abs() < 1e-14 {
        return Err(AllocError::ZeroNormalizer);
    }
    let weights: Vec<f64> = x.iter().map(|v| v / s).collect();
    Ok(WeightVector::new_allow_shorts(mu.assets.clone(), weights)?)
}

/// Long-only maximum Sharpe solution.
#[derive(Debug, Clone)]
pub struct LongOnlySolution {
    pub weights: WeightVector,
    /// True when every asset was clamped and the allocation fell back to the
    /// single asset with the best standalone Sharpe.
    pub used_fallback: bool,
}

/// Long-only tangency portfolio via active-set iteration: start from the
/// unconstrained solution, clamp negative weights to zero, and re-solve on
/// the remaining free set until none are negative.
pub fn max_sharpe_long_only(
    mu: &ExpectedReturns,
    cov: &DMatrix<f64>,
    rf: f64,
) -> Result<LongOnlySolution, AllocError> {
    let n = cov.nrows();
    if mu.mu.len() != n {
        return Err(AllocError::DimensionMismatch {
            mu: mu.mu.len(),
            cov: n,
        });
    }
    if n == 0 {
        return Err(AllocError::EmptyUniverse);
    }
    // Validate SPD up front so the error names the decomposition.
    cholesky_with_ridge(cov)?;

    let mut free: Vec<usize> = (0..n).collect();
    while !free.is_empty() {
        let sub_cov = DMatrix::from_fn(free.len(), free.len(), |a, b| cov[(free[a], free[b])]);
        let sub_excess = DVector::from_fn(free.len(), |a, _| mu.mu[free[a]] - rf);
        let chol = cholesky_with_ridge(&sub_cov)?;
        let x = chol.solve(&sub_excess);
        let negatives: Vec<usize> = (0..free.len()).filter(|&a| x[a] < 0.0).collect();
        if negatives.is_empty() {
            let s: f64 = x.sum();
            if s <= 1e-14 {
                break; // no investable direction on the free set
            }
            let mut weights = vec![0.0; n];
            for (a, &i) in free.iter().enumerate() {
                weights[i] = (x[a] / s).max(0.0);
            }
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            return Ok(LongOnlySolution {
                weights: WeightVector::new(mu.assets.clone(), weights)?,
                used_fallback: false,
            });
        }
        for &a in negatives.iter().rev() {
            free.remove(a);
        }
    }

    // All assets clamped: fall back to the best standalone Sharpe.
    let best = (0..n)
        .max_by(|&a, &b| {
            let sa = (mu.mu[a] - rf) / cov[(a, a)].sqrt();
            let sb = (mu.mu[b] - rf) / cov[(b, b)].sqrt();
            sa.partial_cmp(&sb).unwrap()
        })
        .expect("non-empty universe");
    let mut weights = vec![0.0; n];
    weights[best] = 1.0;
    Ok(LongOnlySolution {
        weights: WeightVector::new(mu.assets.clone(), weights)?,
        used_fallback: true,
    })
}
