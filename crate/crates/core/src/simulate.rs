//! Seeded correlated geometric-Brownian price panels with block correlation
//! structure, emitted in the ingestion CSV format. Used as the test fixture
//! generator for desk-scale verification.

use chrono::{Datelike, NaiveDate, Weekday};
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("need at least 2 assets, requested {0}")]
    TooFewAssets(usize),
    #[error("block count {blocks} must be in 1..={assets}")]
    BadBlockCount { blocks: usize, assets: usize },
    #[error("need at least 2 days, requested {0}")]
    TooFewDays(usize),
    #[error("volatility must be positive, got {0}")]
    BadVolatility(f64),
    #[error("implied correlation matrix (within={within}, between={between}) is not positive definite")]
    NotPositiveDefinite { within: f64, between: f64 },
}

/// Parameters for the block-correlated GBM panel.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n_assets: usize,
    pub blocks: usize,
    pub within_rho: f64,
    pub between_rho: f64,
    /// Daily volatility of the first block; later blocks scale up by
    /// `vol_step` each (block b gets vol * (1 + b * vol_step)).
    pub vol: f64,
    pub vol_step: f64,
    /// Daily drift of the log price.
    pub drift: f64,
    pub days: usize,
    pub seed: u64,
    pub start_date: NaiveDate,
    pub initial_price: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_assets: 10,
            blocks: 2,
            within_rho: 0.8,
            between_rho: 0.1,
            vol: 0.01,
            vol_step: 0.5,
            drift: 0.0002,
            days: 504,
            seed: 0,
            start_date: NaiveDate::from_ymd_opt(2020, 1, 2).unwrap(),
            initial_price: 100.0,
        }
    }
}

/// Near-equal contiguous block assignment: the first `n % blocks` blocks get
/// one extra asset.
pub fn block_assignment(n_assets: usize, blocks: usize) -> Vec<usize> {
    let base = n_assets / blocks;
    let extra = n_assets % blocks;
    let mut assignment = Vec::with_capacity(n_assets);
    for b in 0..blocks {
        let size = base + usize::from(b < extra);
        assignment.extend(std::iter::repeat_n(b, size));
    }
    assignment
}

fn correlation_matrix(config: &SimConfig, assignment: &[usize]) -> DMatrix<f64> {
    let n = config.n_assets;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if assignment[i] == assignment[j] {
            config.within_rho
        } else {
            config.between_rho
        }
    })
}

/// Simulated panel: dates, tickers, and row-major prices.
#[derive(Debug, Clone)]
pub struct SimulatedPanel {
    pub dates: Vec<NaiveDate>,
    pub assets: Vec<String>,
    pub prices: Vec<f64>,
    pub block_of: Vec<usize>,
}

fn next_weekday(mut date: NaiveDate) -> NaiveDate {
    loop {
        date = date.succ_opt().expect("date overflow");
        if !matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
            return date;
        }
    }
}

/// Generate the panel. Deterministic for a fixed config (ChaCha8 stream).
pub fn simulate(config: &SimConfig) -> Result<SimulatedPanel, SimError> {
    if config.n_assets < 2 {
        return Err(SimError::TooFewAssets(config.n_assets));
    }
    if config.blocks == 0 || config.blocks > config.n_assets {
        return Err(SimError::BadBlockCount {
            blocks: config.blocks,
            assets: config.n_assets,
        });
    }
    if config.days < 2 {
        return Err(SimError::TooFewDays(config.days));
    }
    if config.vol.is_nan() || config.vol <= 0.0 {
        return Err(SimError::BadVolatility(config.vol));
    }

    let assignment = block_assignment(config.n_assets, config.blocks);
    let corr = correlation_matrix(config, &assignment);
    let chol = Cholesky::new(corr).ok_or(SimError::NotPositiveDefinite {
        within: config.within_rho,
        between: config.between_rho,
    })?;
    let l = chol.l();

    let vols: Vec<f64> = assignment
        .iter()
        .map(|&b| config.vol * (1.0 + b as f64 * config.vol_step))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_assets;
    let mut log_prices = vec![config.initial_price.ln(); n];
    let mut prices = Vec::with_capacity(config.days * n);
    let mut dates = Vec::with_capacity(config.days);

    let mut date = config.start_date;
    if matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
        date = next_weekday(date);
    }
    for day in 0..config.days {
        if day > 0 {
            let z = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            let correlated = &l * z;
            for i in 0..n {
                log_prices[i] += config.drift + vols[i] * correlated[i];
            }
        }
        dates.push(date);
        prices.extend(log_prices.iter().map(|lp| lp.exp()));
        date = next_weekday(date);
    }

    let assets = (0..n).map(|i| format!("SIM{:02}", i)).collect();
    Ok(SimulatedPanel {
        dates,
        assets,
        prices,
        block_of: assignment,
    })
}

/// Render the panel in the ingestion CSV format with fixed 6-decimal prices.
pub fn panel_to_csv(panel: &SimulatedPanel) -> String {
    let n = panel.assets.len();
    let mut out = String::from("date");
    for a in &panel.assets {
        out.push(',');
        out.push_str(a);
    }
    out.push('\n');
    for (t, date) in panel.dates.iter().enumerate() {
        out.push_str(&date.format("%Y-%m-%d").to_string());
        for i in 0..n {
            out.push_str(&format!(",{:.6}", panel.prices[t * n + i]));
        }
        out.push('\n');
    }
    out
}
