//! Price panel ingestion, alignment, and log-return computation.
//!
//! The ingestion format is a wide CSV: header `date,<T1>,<T2>,...`, ISO-8601
//! dates in the first column, one ticker per remaining column, empty cell =
//! missing observation.

use std::collections::HashSet;
use std::io::Read;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarketDataError {
    #[error("csv read error: {0}")]
    Csv(#[from] csv::Error),
    #[error("header must start with a `date` column, found `{0}`")]
    BadHeader(String),
    #[error("duplicate ticker `{0}` in header")]
    DuplicateTicker(String),
    #[error("row {row}: malformed date `{value}`")]
    BadDate { row: usize, value: String },
    #[error("row {row}: duplicate date {date}")]
    DuplicateDate { row: usize, date: NaiveDate },
    #[error("row {row}, ticker {ticker}: malformed price `{value}`")]
    BadPrice {
        row: usize,
        ticker: String,
        value: String,
    },
    #[error("row {row}, ticker {ticker}: non-positive price {value}")]
    NonPositivePrice {
        row: usize,
        ticker: String,
        value: f64,
    },
    #[error("row {row}: expected {expected} price cells, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("alignment produced an empty panel: {0}")]
    EmptyPanel(String),
    #[error("panel is not dense: ticker {ticker} has a missing cell at {date}")]
    NotDense { ticker: String, date: NaiveDate },
    #[error("need at least 2 rows of prices to compute returns, have {0}")]
    TooShort(usize),
}

/// Date-indexed wide panel of daily closing prices, possibly with gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    pub dates: Vec<NaiveDate>,
    pub assets: Vec<String>,
    /// Row-major `dates.len() x assets.len()`, `None` = missing observation.
    prices: Vec<Option<f64>>,
}

impl PriceTable {
    pub fn new(
        dates: Vec<NaiveDate>,
        assets: Vec<String>,
        prices: Vec<Option<f64>>,
    ) -> Result<Self, MarketDataError> {
        assert_eq!(prices.len(), dates.len() * assets.len());
        let table = PriceTable {
            dates,
            assets,
            prices,
        };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<(), MarketDataError> {
        for (row, w) in self.dates.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(MarketDataError::DuplicateDate {
                    row: row + 1,
                    date: w[1],
                });
            }
        }
        let mut seen = HashSet::new();
        for a in &self.assets {
            if !seen.insert(a.as_str()) {
                return Err(MarketDataError::DuplicateTicker(a.clone()));
            }
        }
        for t in 0..self.dates.len() {
            for i in 0..self.assets.len() {
                if let Some(p) = self.price(t, i) {
                    if p.is_nan() || p <= 0.0 {
                        return Err(MarketDataError::NonPositivePrice {
                            row: t,
                            ticker: self.assets[i].clone(),
                            value: p,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn price(&self, t: usize, i: usize) -> Option<f64> {
        self.prices[t * self.assets.len() + i]
    }

    pub fn is_dense(&self) -> bool {
        self.prices.iter().all(|c| c.is_some())
    }
}

/// Missing-data and windowing policy applied by [`align`].
#[derive(Debug, Clone)]
pub struct AlignmentPolicy {
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    /// Assets whose missing-cell fraction inside the window exceeds this are dropped.
    pub max_missing_frac: f64,
}

impl Default for AlignmentPolicy {
    fn default() -> Self {
        AlignmentPolicy {
            start: None,
            end: None,
            max_missing_frac: 0.10,
        }
    }
}

/// Dense, aligned matrix of daily continuously compounded log returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMatrix {
    /// Dates of the returns (the second date of each price pair), length T.
    pub dates: Vec<NaiveDate>,
    /// Date of the price row preceding the first return; anchors wealth curves.
    pub anchor_date: NaiveDate,
    pub assets: Vec<String>,
    /// T x N.
    pub values: DMatrix<f64>,
}

impl ReturnMatrix {
    pub fn n_periods(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_assets(&self) -> usize {
        self.values.ncols()
    }
}

/// Parse a wide price CSV into a [`PriceTable`].
///
/// Rows are sorted by date after parsing; duplicate dates and duplicate
/// ticker headers are rejected.
pub fn load_prices<R: Read>(source: R) -> Result<PriceTable, MarketDataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    let mut cols = headers.iter();
    match cols.next() {
        Some(first) if first.trim().eq_ignore_ascii_case("date") => {}
        other => {
            return Err(MarketDataError::BadHeader(
                other.unwrap_or_default().to_string(),
            ))
        }
    }
    let assets: Vec<String> = cols.map(|c| c.trim().to_string()).collect();
    let mut seen = HashSet::new();
    for a in &assets {
        if !seen.insert(a.as_str()) {
            return Err(MarketDataError::DuplicateTicker(a.clone()));
        }
    }

    let mut rows: Vec<(NaiveDate, Vec<Option<f64>>)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = idx + 1; // 1-based data row for diagnostics
        let date_str = record.get(0).unwrap_or_default().trim();
        let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d").map_err(|_| {
            MarketDataError::BadDate {
                row,
                value: date_str.to_string(),
            }
        })?;
        if record.len() != assets.len() + 1 {
            return Err(MarketDataError::RaggedRow {
                row,
                expected: assets.len(),
                found: record.len().saturating_sub(1),
            });
        }
        let mut cells = Vec::with_capacity(assets.len());
        for (i, raw) in record.iter().skip(1).enumerate() {
            let raw = raw.trim();
            if raw.is_empty() {
                cells.push(None);
                continue;
            }
            let value: f64 = raw.parse().map_err(|_| MarketDataError::BadPrice {
                row,
                ticker: assets[i].clone(),
                value: raw.to_string(),
            })?;
            if !value.is_finite() || value <= 0.0 {
                return Err(MarketDataError::NonPositivePrice {
                    row,
                    ticker: assets[i].clone(),
                    value,
                });
            }
            cells.push(Some(value));
        }
        rows.push((date, cells));
    }

    rows.sort_by_key(|(d, _)| *d);
    for (i, w) in rows.windows(2).enumerate() {
        if w[0].0 == w[1].0 {
            return Err(MarketDataError::DuplicateDate {
                row: i + 2,
                date: w[1].0,
            });
        }
    }

    let dates: Vec<NaiveDate> = rows.iter().map(|(d, _)| *d).collect();
    let prices: Vec<Option<f64>> = rows.into_iter().flat_map(|(_, cells)| cells).collect();
    PriceTable::new(dates, assets, prices)
}

/// Restrict the panel to the configured window, drop sparse assets, forward
/// fill interior gaps, and shrink the window to common coverage.
pub fn align(table: &PriceTable, policy: &AlignmentPolicy) -> Result<PriceTable, MarketDataError> {
    let date_idx: Vec<usize> = table
        .dates
        .iter()
        .enumerate()
        .filter(|(_, d)| {
            policy.start.is_none_or(|s| **d >= s) && policy.end.is_none_or(|e| **d <= e)
        })
        .map(|(t, _)| t)
        .collect();
    if date_idx.is_empty() {
        return Err(MarketDataError::EmptyPanel(
            "no dates inside the requested window".into(),
        ));
    }

    // Missing fraction per asset, measured inside the window.
    let keep: Vec<usize> = (0..table.n_assets())
        .filter(|&i| {
            let missing = date_idx
                .iter()
                .filter(|&&t| table.price(t, i).is_none())
                .count();
            (missing as f64 / date_idx.len() as f64) <= policy.max_missing_frac
        })
        .collect();
    if keep.is_empty() {
        return Err(MarketDataError::EmptyPanel(format!(
            "every asset exceeds max_missing_frac = {}",
            policy.max_missing_frac
        )));
    }

    // Latest first-observation among retained assets bounds the common window.
    let mut first_rows = Vec::with_capacity(keep.len());
    for &i in &keep {
        let first = date_idx.iter().position(|&t| table.price(t, i).is_some());
        match first {
            Some(pos) => first_rows.push(pos),
            None => {
                return Err(MarketDataError::EmptyPanel(format!(
                    "asset {} has no observations inside the window",
                    table.assets[i]
                )))
            }
        }
    }
    let start_pos = first_rows.into_iter().max().unwrap();
    let date_idx = &date_idx[start_pos..];

    let dates: Vec<NaiveDate> = date_idx.iter().map(|&t| table.dates[t]).collect();
    let assets: Vec<String> = keep.iter().map(|&i| table.assets[i].clone()).collect();
    let mut prices = Vec::with_capacity(dates.len() * assets.len());
    let mut last: Vec<Option<f64>> = vec![None; keep.len()];
    for &t in date_idx {
        for (k, &i) in keep.iter().enumerate() {
            if let Some(p) = table.price(t, i) {
                last[k] = Some(p);
            }
            prices.push(last[k]);
        }
    }
    debug_assert!(prices.iter().all(|c| c.is_some()));
    PriceTable::new(dates, assets, prices)
}

/// Daily continuously compounded log returns of a dense panel.
pub fn log_returns(table: &PriceTable) -> Result<ReturnMatrix, MarketDataError> {
    if table.n_dates() < 2 {
        return Err(MarketDataError::TooShort(table.n_dates()));
    }
    let (t_len, n) = (table.n_dates(), table.n_assets());
    for t in 0..t_len {
        for i in 0..n {
            if table.price(t, i).is_none() {
                return Err(MarketDataError::NotDense {
                    ticker: table.assets[i].clone(),
                    date: table.dates[t],
                });
            }
        }
    }
    let values = DMatrix::from_fn(t_len - 1, n, |t, i| {
        (table.price(t + 1, i).unwrap() / table.price(t, i).unwrap()).ln()
    });
    Ok(ReturnMatrix {
        dates: table.dates[1..].to_vec(),
        anchor_date: table.dates[0],
        assets: table.assets.clone(),
        values,
    })
}
