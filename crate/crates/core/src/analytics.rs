//! Wealth curves and the seven-metric performance report.
//!
//! Conventions: annualized return is geometric (exp of the scaled mean log
//! return minus one), volatility is the sqrt-of-periods scaled sample
//! standard deviation, and the Sortino downside deviation uses the
//! full-sample denominator. Undefined metrics (zero denominators) are
//! reported as explicit nulls with a reason, never as zero.

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::allocators;
use crate::marketdata::ReturnMatrix;
use crate::weights::WeightVector;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("weight assets do not match return assets; only in weights: {only_weights:?}, only in returns: {only_returns:?}")]
    TickerMismatch {
        only_weights: Vec<String>,
        only_returns: Vec<String>,
    },
    #[error("series length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty return series")]
    EmptySeries,
    #[error("{metric} undefined: {reason}")]
    Undefined { metric: &'static str, reason: String },
    #[error(transparent)]
    Alloc(#[from] allocators::AllocError),
}

/// Cumulative wealth anchored at 1.0 before the first return.
#[derive(Debug, Clone, PartialEq)]
pub struct WealthSeries {
    pub dates: Vec<NaiveDate>,
    pub wealth: Vec<f64>,
}

/// Static-weight portfolio return series: r_p[t] = sum_i w_i r[t][i].
///
/// Weights are aligned to the return matrix by ticker; any symmetric
/// difference is an error.
pub fn portfolio_returns(
    returns: &ReturnMatrix,
    w: &WeightVector,
) -> Result<Vec<f64>, AnalyticsError> {
    let aligned = align_weights(returns, w)?;
    Ok((0..returns.n_periods())
        .map(|t| {
            aligned
                .iter()
                .enumerate()
                .map(|(i, wi)| wi * returns.values[(t, i)])
                .sum()
        })
        .collect())
}

fn align_weights(returns: &ReturnMatrix, w: &WeightVector) -> Result<Vec<f64>, AnalyticsError> {
    let mut aligned = Vec::with_capacity(returns.assets.len());
    let mut only_returns = Vec::new();
    for ticker in &returns.assets {
        match w.assets.iter().position(|a| a == ticker) {
            Some(pos) => aligned.push(w.weights[pos]),
            None => only_returns.push(ticker.clone()),
        }
    }
    let only_weights: Vec<String> = w
        .assets
        .iter()
        .filter(|a| !returns.assets.contains(a))
        .cloned()
        .collect();
    if !only_returns.is_empty() || !only_weights.is_empty() {
        return Err(AnalyticsError::TickerMismatch {
            only_weights,
            only_returns,
        });
    }
    Ok(aligned)
}

/// wealth[t] = exp(cumulative sum of log returns through t), anchored at 1.0.
pub fn wealth_values(r_p: &[f64]) -> Vec<f64> {
    let mut wealth = Vec::with_capacity(r_p.len() + 1);
    let mut cum = 0.0;
    wealth.push(1.0);
    for r in r_p {
        cum += r;
        wealth.push(cum.exp());
    }
    wealth
}

/// Dated wealth curve; the anchor date precedes the first return date.
pub fn wealth_curve(r_p: &[f64], anchor: NaiveDate, dates: &[NaiveDate]) -> WealthSeries {
    debug_assert_eq!(r_p.len(), dates.len());
    let mut all_dates = Vec::with_capacity(dates.len() + 1);
    all_dates.push(anchor);
    all_dates.extend_from_slice(dates);
    WealthSeries {
        dates: all_dates,
        wealth: wealth_values(r_p),
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_stdev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Geometric annualization: exp(periods_per_year * mean log return) - 1.
pub fn annualized_return(r_p: &[f64], periods_per_year: f64) -> Result<f64, AnalyticsError> {
    if r_p.is_empty() {
        return Err(AnalyticsError::EmptySeries);
    }
    Ok((periods_per_year * mean(r_p)).exp() - 1.0)
}

/// Sample standard deviation (divisor T-1) scaled by sqrt(periods_per_year).
pub fn annualized_volatility(r_p: &[f64], periods_per_year: f64) -> Result<f64, AnalyticsError> {
    if r_p.is_empty() {
        return Err(AnalyticsError::EmptySeries);
    }
    Ok(sample_stdev(r_p) * periods_per_year.sqrt())
}

pub fn sharpe_ratio(r_p: &[f64], rf: f64, periods_per_year: f64) -> Result<f64, AnalyticsError> {
    let vol = annualized_volatility(r_p, periods_per_year)?;
    if vol == 0.0 {
        return Err(AnalyticsError::Undefined {
            metric: "sharpe",
            reason: "zero volatility".into(),
        });
    }
    Ok((annualized_return(r_p, periods_per_year)? - rf) / vol)
}

/// Downside deviation over ALL days: sqrt(mean of min(r - rf_daily, 0)^2),
/// scaled by sqrt(periods_per_year).
pub fn downside_deviation(r_p: &[f64], rf: f64, periods_per_year: f64) -> f64 {
    let rf_daily = rf / periods_per_year;
    let ss: f64 = r_p
        .iter()
        .map(|r| (r - rf_daily).min(0.0).powi(2))
        .sum::<f64>()
        / r_p.len() as f64;
    ss.sqrt() * periods_per_year.sqrt()
}

pub fn sortino_ratio(r_p: &[f64], rf: f64, periods_per_year: f64) -> Result<f64, AnalyticsError> {
    if r_p.is_empty() {
        return Err(AnalyticsError::EmptySeries);
    }
    let dd = downside_deviation(r_p, rf, periods_per_year);
    if dd == 0.0 {
        return Err(AnalyticsError::Undefined {
            metric: "sortino",
            reason: "no downside observations".into(),
        });
    }
    Ok((annualized_return(r_p, periods_per_year)? - rf) / dd)
}

/// Largest peak-to-trough decline of the wealth curve, as a fraction <= 0.
pub fn max_drawdown(wealth: &[f64]) -> Result<f64, AnalyticsError> {
    if wealth.is_empty() {
        return Err(AnalyticsError::EmptySeries);
    }
    let mut peak = f64::MIN;
    let mut worst = 0.0f64;
    for &w in wealth {
        peak = peak.max(w);
        worst = worst.min(w / peak - 1.0);
    }
    Ok(worst)
}

pub fn calmar_ratio(r_p: &[f64], periods_per_year: f64) -> Result<f64, AnalyticsError> {
    let dd = max_drawdown(&wealth_values(r_p))?;
    if dd == 0.0 {
        return Err(AnalyticsError::Undefined {
            metric: "calmar",
            reason: "zero drawdown".into(),
        });
    }
    Ok(annualized_return(r_p, periods_per_year)? / dd.abs())
}

/// Annualized standard deviation of the active return r_p - r_b.
pub fn tracking_error(
    r_p: &[f64],
    r_b: &[f64],
    periods_per_year: f64,
) -> Result<f64, AnalyticsError> {
    if r_p.len() != r_b.len() {
        return Err(AnalyticsError::LengthMismatch(r_p.len(), r_b.len()));
    }
    let diff: Vec<f64> = r_p.iter().zip(r_b).map(|(p, b)| p - b).collect();
    annualized_volatility(&diff, periods_per_year)
}

/// One row of the comparative report. Metrics that are undefined for the
/// series carry `None` plus a reason in `notes`; the benchmark row has no
/// tracking error by construction.
#[derive(Debug, Clone, Serialize)]
pub struct PerformanceReport {
    pub portfolio_name: String,
    pub annual_return: f64,
    pub volatility: f64,
    pub sharpe: Option<f64>,
    pub sortino: Option<f64>,
    pub calmar: Option<f64>,
    pub max_drawdown: f64,
    pub tracking_error: Option<f64>,
    pub notes: Vec<String>,
}

/// Label used for the equal-weight benchmark row; its tracking error is absent.
pub const BENCHMARK_NAME: &str = "1/N";

fn metric_or_note(
    result: Result<f64, AnalyticsError>,
    notes: &mut Vec<String>,
) -> Option<f64> {
    match result {
        Ok(v) => Some(v),
        Err(e @ AnalyticsError::Undefined { .. }) => {
            notes.push(e.to_string());
            None
        }
        Err(_) => None,
    }
}

/// Per-strategy wealth curves keyed by the strategy's display name.
pub type NamedWealthCurves = Vec<(String, WealthSeries)>;

/// Compute the full metric set for each strategy, in the given order.
/// Tracking error is measured against the 1/N portfolio over the same
/// universe, and omitted for the row named [`BENCHMARK_NAME`].
pub fn build_report(
    returns: &ReturnMatrix,
    strategies: &[(String, WeightVector)],
    rf: f64,
    periods_per_year: f64,
) -> Result<(Vec<PerformanceReport>, NamedWealthCurves), AnalyticsError> {
    let benchmark_weights = allocators::equal_weight(&returns.assets)?;
    let benchmark_series = portfolio_returns(returns, &benchmark_weights)?;

    let mut rows = Vec::with_capacity(strategies.len());
    let mut curves = Vec::with_capacity(strategies.len());
    for (name, weights) in strategies {
        let r_p = portfolio_returns(returns, weights)?;
        let wealth = wealth_values(&r_p);
        let mut notes = Vec::new();
        let tracking = if name == BENCHMARK_NAME {
            None
        } else {
            metric_or_note(
                tracking_error(&r_p, &benchmark_series, periods_per_year),
                &mut notes,
            )
        };
        rows.push(PerformanceReport {
            portfolio_name: name.clone(),
            annual_return: annualized_return(&r_p, periods_per_year)?,
            volatility: annualized_volatility(&r_p, periods_per_year)?,
            sharpe: metric_or_note(sharpe_ratio(&r_p, rf, periods_per_year), &mut notes),
            sortino: metric_or_note(sortino_ratio(&r_p, rf, periods_per_year), &mut notes),
            calmar: metric_or_note(calmar_ratio(&r_p, periods_per_year), &mut notes),
            max_drawdown: max_drawdown(&wealth)?,
            tracking_error: tracking,
            notes,
        });
        curves.push((
            name.clone(),
            wealth_curve(&r_p, returns.anchor_date, &returns.dates),
        ));
    }
    Ok((rows, curves))
}

/// Table-layout CSV header shared by the report exporters.
pub const REPORT_CSV_HEADER: &str =
    "Portfolio,Annual Return,Volatility,Sharpe,Sortino,Calmar,Max Drawdown,Tracking Error";

fn fmt3(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.3}"),
        None => "--".to_string(),
    }
}

/// Render report rows in the comparative-table layout, 3 decimals, `--` for
/// absent or undefined cells.
pub fn report_csv(rows: &[PerformanceReport]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.portfolio_name,
            fmt3(Some(row.annual_return)),
            fmt3(Some(row.volatility)),
            fmt3(row.sharpe),
            fmt3(row.sortino),
            fmt3(row.calmar),
            fmt3(Some(row.max_drawdown)),
            fmt3(row.tracking_error),
        ));
    }
    out
}
