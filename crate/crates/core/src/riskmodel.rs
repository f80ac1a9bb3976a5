//! Covariance/correlation estimation and the correlation-distance transform.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::marketdata::ReturnMatrix;

#[derive(Debug, Error)]
pub enum RiskModelError {
    #[error("need at least 2 return observations, have {0}")]
    TooFewObservations(usize),
    #[error("asset {0} has zero sample variance; correlation is undefined")]
    ZeroVariance(String),
    #[error("correlation {0} outside [-1, 1]")]
    CorrelationOutOfRange(f64),
}

/// Covariance, correlation, and correlation-distance matrices for one universe.
#[derive(Debug, Clone)]
pub struct RiskModel {
    pub assets: Vec<String>,
    /// Daily-return variance units, symmetric, positive diagonal.
    pub covariance: DMatrix<f64>,
    /// Unit diagonal, entries in [-1, 1].
    pub correlation: DMatrix<f64>,
    /// d_ij = sqrt((1 - rho_ij) / 2), entries in [0, 1], zero diagonal.
    pub distance: DMatrix<f64>,
}

const CLAMP_TOL: f64 = 1e-9;

/// Map a correlation in [-1, 1] to a dissimilarity in [0, 1].
///
/// Values within `1e-9` of the bounds are clamped; anything further out is
/// rejected as a domain error.
pub fn distance_from_correlation(rho: f64) -> Result<f64, RiskModelError> {
    if !rho.is_finite() || !(-1.0 - CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&rho) {
        return Err(RiskModelError::CorrelationOutOfRange(rho));
    }
    let rho = rho.clamp(-1.0, 1.0);
    Ok(((1.0 - rho) / 2.0).sqrt())
}

/// Unbiased sample covariance (divisor T-1), derived correlation, and the
/// distance matrix feeding tree clustering.
pub fn estimate(returns: &ReturnMatrix) -> Result<RiskModel, RiskModelError> {
    let t_len = returns.n_periods();
    let n = returns.n_assets();
    if t_len < 2 {
        return Err(RiskModelError::TooFewObservations(t_len));
    }

    let means: Vec<f64> = (0..n)
        .map(|i| returns.values.column(i).sum() / t_len as f64)
        .collect();

    let mut covariance = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for t in 0..t_len {
                acc += (returns.values[(t, i)] - means[i]) * (returns.values[(t, j)] - means[j]);
            }
            let c = acc / (t_len - 1) as f64;
            covariance[(i, j)] = c;
            covariance[(j, i)] = c;
        }
    }

    for i in 0..n {
        if covariance[(i, i)] <= 0.0 {
            return Err(RiskModelError::ZeroVariance(returns.assets[i].clone()));
        }
    }

    let mut correlation = DMatrix::zeros(n, n);
    let mut distance = DMatrix::zeros(n, n);
    for i in 0..n {
        correlation[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let rho = covariance[(i, j)] / (covariance[(i, i)] * covariance[(j, j)]).sqrt();
            let rho = rho.clamp(-1.0, 1.0);
            let d = distance_from_correlation(rho)?;
            correlation[(i, j)] = rho;
            correlation[(j, i)] = rho;
            distance[(i, j)] = d;
            distance[(j, i)] = d;
        }
    }

    Ok(RiskModel {
        assets: returns.assets.clone(),
        covariance,
        correlation,
        distance,
    })
}
