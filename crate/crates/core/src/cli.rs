//! Command-line wiring: `weights`, `report`, and `simulate` subcommands.
//!
//! Config precedence is flags > optional TOML config file > defaults; the
//! config file mirrors flag names exactly. Exit codes: 0 success, 1
//! computation error, 2 usage/IO error.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::allocators;
use crate::analytics::{self, BENCHMARK_NAME};
use crate::export::{self, ReportDocument, ReportMetadata};
use crate::hrp::{self, DendrogramExport, HrpConfig, Linkage};
use crate::marketdata::{self, AlignmentPolicy};
use crate::riskmodel;
use crate::simulate::{self, SimConfig};
use crate::weights::WeightVector;

/// Failures carry the process exit code: 1 for computation errors, 2 for
/// usage and IO errors.
#[derive(Debug)]
pub struct CliError {
    pub exit_code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            exit_code: 2,
            message: message.into(),
        }
    }

    fn compute(message: impl Into<String>) -> Self {
        CliError {
            exit_code: 1,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hrpfolio",
    version,
    about = "Hierarchical risk parity portfolio construction, benchmarks, and performance reports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute allocation weights and write one CSV per strategy.
    Weights(RunArgs),
    /// Full report: metrics table, wealth curves, and figure-data exports.
    Report(RunArgs),
    /// Generate a seeded block-correlated GBM price panel.
    Simulate(SimArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct RunArgs {
    /// Input price CSV (header: date,<T1>,<T2>,...).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Optional TOML config file mirroring these flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Inclusive window start (YYYY-MM-DD).
    #[arg(long)]
    pub start: Option<NaiveDate>,
    /// Inclusive window end (YYYY-MM-DD).
    #[arg(long)]
    pub end: Option<NaiveDate>,
    /// Comma-separated subset of hrp,max_sharpe,equal_weight.
    #[arg(long)]
    pub strategies: Option<String>,
    /// Linkage method: single|complete|average|ward.
    #[arg(long)]
    pub linkage: Option<Linkage>,
    /// Annual risk-free rate.
    #[arg(long)]
    pub rf: Option<f64>,
    /// Constrain the max-Sharpe portfolio to long-only weights.
    #[arg(long)]
    pub long_only: Option<bool>,
    #[arg(long)]
    pub periods_per_year: Option<u32>,
    /// Drop assets whose missing-cell fraction exceeds this.
    #[arg(long)]
    pub max_missing_frac: Option<f64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Also render dendrogram.svg (report only).
    #[arg(long, default_value_t = false)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 10)]
    pub n_assets: usize,
    #[arg(long, default_value_t = 2)]
    pub blocks: usize,
    #[arg(long, default_value_t = 0.8)]
    pub within_rho: f64,
    #[arg(long, default_value_t = 0.1)]
    pub between_rho: f64,
    /// Daily volatility of the first block.
    #[arg(long, default_value_t = 0.01)]
    pub vol: f64,
    /// Per-block volatility escalation factor.
    #[arg(long, default_value_t = 0.5)]
    pub vol_step: f64,
    /// Daily log-price drift.
    #[arg(long, default_value_t = 0.0002)]
    pub drift: f64,
    #[arg(long, default_value_t = 504)]
    pub days: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// First calendar date of the panel (weekends are skipped).
    #[arg(long, default_value = "2020-01-02")]
    pub start: NaiveDate,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

/// Requested strategies in the canonical report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Strategy {
    Hrp,
    MaxSharpe,
    EqualWeight,
}

impl Strategy {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "hrp" => Ok(Strategy::Hrp),
            "max_sharpe" => Ok(Strategy::MaxSharpe),
            "equal_weight" => Ok(Strategy::EqualWeight),
            other => Err(CliError::usage(format!(
                "unknown strategy `{other}` (expected hrp, max_sharpe, equal_weight)"
            ))),
        }
    }

    fn slug(self) -> &'static str {
        match self {
            Strategy::Hrp => "hrp",
            Strategy::MaxSharpe => "max_sharpe",
            Strategy::EqualWeight => "equal_weight",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Strategy::Hrp => "HRP",
            Strategy::MaxSharpe => "Max Sharpe",
            Strategy::EqualWeight => BENCHMARK_NAME,
        }
    }
}

/// Values read from the optional TOML config file; keys mirror flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    input: Option<PathBuf>,
    start: Option<NaiveDate>,
    end: Option<NaiveDate>,
    strategies: Option<String>,
    linkage: Option<String>,
    rf: Option<f64>,
    long_only: Option<bool>,
    periods_per_year: Option<u32>,
    max_missing_frac: Option<f64>,
    output_dir: Option<PathBuf>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    pub strategies: Vec<Strategy>,
    pub linkage: Linkage,
    pub rf: f64,
    pub long_only: bool,
    pub periods_per_year: f64,
    pub max_missing_frac: f64,
    pub output_dir: PathBuf,
    pub svg: bool,
}

fn parse_strategies(list: &str) -> Result<Vec<Strategy>, CliError> {
    let mut strategies: Vec<Strategy> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(Strategy::parse)
        .collect::<Result<_, _>>()?;
    strategies.sort();
    strategies.dedup();
    if strategies.is_empty() {
        return Err(CliError::usage("strategy list is empty"));
    }
    Ok(strategies)
}

impl RunConfig {
    pub fn resolve(args: &RunArgs) -> Result<Self, CliError> {
        let file: FileConfig = match &args.config {
            Some(path) => {
                let raw = fs::read_to_string(path).map_err(|e| {
                    CliError::usage(format!("cannot read config {}: {e}", path.display()))
                })?;
                toml::from_str(&raw).map_err(|e| {
                    CliError::usage(format!("invalid config {}: {e}", path.display()))
                })?
            }
            None => FileConfig::default(),
        };

        let input = args
            .input
            .clone()
            .or(file.input)
            .ok_or_else(|| CliError::usage("--input is required"))?;
        let strategies = match args.strategies.as_deref().or(file.strategies.as_deref()) {
            Some(list) => parse_strategies(list)?,
            None => vec![Strategy::Hrp, Strategy::MaxSharpe, Strategy::EqualWeight],
        };
        let linkage = match (&args.linkage, &file.linkage) {
            (Some(l), _) => *l,
            (None, Some(s)) => s.parse::<Linkage>().map_err(CliError::usage)?,
            (None, None) => Linkage::Single,
        };
        let periods_per_year = args
            .periods_per_year
            .or(file.periods_per_year)
            .unwrap_or(252);
        if periods_per_year < 1 {
            return Err(CliError::usage("--periods-per-year must be >= 1"));
        }
        let rf = args.rf.or(file.rf).unwrap_or(0.0);
        if !rf.is_finite() {
            return Err(CliError::usage("--rf must be finite"));
        }
        let max_missing_frac = args.max_missing_frac.or(file.max_missing_frac).unwrap_or(0.10);
        if !(0.0..=1.0).contains(&max_missing_frac) {
            return Err(CliError::usage("--max-missing-frac must lie in [0, 1]"));
        }
        Ok(RunConfig {
            input,
            start: args.start.or(file.start),
            end: args.end.or(file.end),
            strategies,
            linkage,
            rf,
            long_only: args.long_only.or(file.long_only).unwrap_or(true),
            periods_per_year: f64::from(periods_per_year),
            max_missing_frac,
            output_dir: args
                .output_dir
                .clone()
                .or(file.output_dir)
                .unwrap_or_else(|| PathBuf::from(".")),
            svg: args.svg,
        })
    }
}

struct Prepared {
    returns: marketdata::ReturnMatrix,
    model: riskmodel::RiskModel,
}

fn prepare(config: &RunConfig) -> Result<Prepared, CliError> {
    let raw = fs::File::open(&config.input).map_err(|e| {
        CliError::usage(format!("cannot open input {}: {e}", config.input.display()))
    })?;
    let table = marketdata::load_prices(raw).map_err(|e| CliError::compute(e.to_string()))?;
    let policy = AlignmentPolicy {
        start: config.start,
        end: config.end,
        max_missing_frac: config.max_missing_frac,
    };
    let aligned =
        marketdata::align(&table, &policy).map_err(|e| CliError::compute(e.to_string()))?;
    let returns =
        marketdata::log_returns(&aligned).map_err(|e| CliError::compute(e.to_string()))?;
    let model = riskmodel::estimate(&returns).map_err(|e| CliError::compute(e.to_string()))?;
    Ok(Prepared { returns, model })
}

fn compute_strategy_weights(
    config: &RunConfig,
    prepared: &Prepared,
) -> Result<Vec<(Strategy, WeightVector, bool)>, CliError> {
    let mut out = Vec::with_capacity(config.strategies.len());
    for &strategy in &config.strategies {
        let (weights, fallback) = match strategy {
            Strategy::Hrp => {
                let hrp_config = HrpConfig {
                    linkage: config.linkage,
                };
                let w = hrp::hrp_weights_from_model(
                    &prepared.model.covariance,
                    &prepared.model.distance,
                    &prepared.returns.assets,
                    &hrp_config,
                )
                .map_err(|e| CliError::compute(e.to_string()))?;
                (w, false)
            }
            Strategy::EqualWeight => (
                allocators::equal_weight(&prepared.returns.assets)
                    .map_err(|e| CliError::compute(e.to_string()))?,
                false,
            ),
            Strategy::MaxSharpe => {
                let mu = allocators::mean_returns(&prepared.returns, config.periods_per_year);
                let cov_annual = prepared.model.covariance.scale(config.periods_per_year);
                if config.long_only {
                    let sol = allocators::max_sharpe_long_only(&mu, &cov_annual, config.rf)
                        .map_err(|e| CliError::compute(e.to_string()))?;
                    (sol.weights, sol.used_fallback)
                } else {
                    let w = allocators::tangency_weights(&mu, &cov_annual, config.rf)
                        .map_err(|e| CliError::compute(e.to_string()))?;
                    (w, false)
                }
            }
        };
        out.push((strategy, weights, fallback));
    }
    Ok(out)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

fn ensure_output_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))
}

/// `weights` subcommand: one `weights_<strategy>.csv` per requested strategy
/// plus a sorted summary on stdout.
pub fn cmd_weights(config: &RunConfig, out: &mut impl std::io::Write) -> Result<(), CliError> {
    let prepared = prepare(config)?;
    let computed = compute_strategy_weights(config, &prepared)?;
    ensure_output_dir(&config.output_dir)?;
    for (strategy, weights, fallback) in &computed {
        let path = config
            .output_dir
            .join(format!("weights_{}.csv", strategy.slug()));
        write_file(&path, &export::weights_csv(weights))?;
        let sum: f64 = weights.weights.iter().sum();
        writeln!(out, "{} (sum = {:.6})", strategy.label(), sum)
            .map_err(|e| CliError::usage(e.to_string()))?;
        if *fallback {
            writeln!(
                out,
                "  warning: all assets clamped; fell back to best single-asset Sharpe"
            )
            .map_err(|e| CliError::usage(e.to_string()))?;
        }
        for (ticker, weight) in weights.sorted_descending() {
            writeln!(out, "  {ticker:<12} {weight:>10.6}")
                .map_err(|e| CliError::usage(e.to_string()))?;
        }
    }
    Ok(())
}

/// `report` subcommand: metrics table, wealth curves, and the figure-data
/// exports (dendrogram, distance matrix, quasi-diagonalized covariance).
pub fn cmd_report(config: &RunConfig, out: &mut impl std::io::Write) -> Result<(), CliError> {
    let prepared = prepare(config)?;
    let computed = compute_strategy_weights(config, &prepared)?;
    ensure_output_dir(&config.output_dir)?;

    let hrp_config = HrpConfig {
        linkage: config.linkage,
    };
    let tree = hrp::cluster(&prepared.model.distance, hrp_config.linkage)
        .map_err(|e| CliError::compute(e.to_string()))?;
    let quasi = hrp::quasi_diagonalize(&prepared.model.covariance, &tree.leaf_order)
        .map_err(|e| CliError::compute(e.to_string()))?;
    let seriated_labels: Vec<String> = tree
        .leaf_order
        .iter()
        .map(|&i| prepared.returns.assets[i].clone())
        .collect();

    let strategies: Vec<(String, WeightVector)> = computed
        .iter()
        .map(|(s, w, _)| (s.label().to_string(), w.clone()))
        .collect();
    let (rows, curves) =
        analytics::build_report(&prepared.returns, &strategies, config.rf, config.periods_per_year)
            .map_err(|e| CliError::compute(e.to_string()))?;

    let max_sharpe_variant = if config.long_only {
        "long-only (active set)"
    } else {
        "unconstrained tangency"
    };
    let doc = ReportDocument {
        metadata: ReportMetadata {
            rf: config.rf,
            periods_per_year: config.periods_per_year,
            linkage: config.linkage.to_string(),
            max_sharpe_variant: max_sharpe_variant.to_string(),
            conventions: vec![
                "portfolio series combines log returns linearly under static weights".into(),
                "annualized return is geometric: exp(periods * mean log return) - 1".into(),
                "sortino downside deviation uses the full-sample denominator".into(),
            ],
        },
        rows: &rows,
    };

    let dir = &config.output_dir;
    write_file(&dir.join("report.json"), &export::report_json(&doc))?;
    write_file(&dir.join("report.csv"), &analytics::report_csv(&rows))?;
    write_file(&dir.join("wealth.csv"), &export::wealth_csv(&curves))?;
    let dendrogram = DendrogramExport::new(&tree, &prepared.returns.assets);
    write_file(
        &dir.join("dendrogram.json"),
        &serde_json::to_string_pretty(&dendrogram).expect("dendrogram serialization"),
    )?;
    write_file(
        &dir.join("distance_matrix.csv"),
        &export::matrix_csv(&prepared.returns.assets, &prepared.model.distance),
    )?;
    write_file(
        &dir.join("quasi_diag_cov.csv"),
        &export::matrix_csv(&seriated_labels, &quasi),
    )?;
    if config.svg {
        write_file(
            &dir.join("dendrogram.svg"),
            &export::dendrogram_svg(&tree, &prepared.returns.assets),
        )?;
    }

    write!(out, "{}", analytics::report_csv(&rows)).map_err(|e| CliError::usage(e.to_string()))?;
    Ok(())
}

/// `simulate` subcommand: writes `prices.csv` into the output directory.
pub fn cmd_simulate(args: &SimArgs, out: &mut impl std::io::Write) -> Result<(), CliError> {
    let config = SimConfig {
        n_assets: args.n_assets,
        blocks: args.blocks,
        within_rho: args.within_rho,
        between_rho: args.between_rho,
        vol: args.vol,
        vol_step: args.vol_step,
        drift: args.drift,
        days: args.days,
        seed: args.seed,
        start_date: args.start,
        initial_price: 100.0,
    };
    let panel = simulate::simulate(&config).map_err(|e| CliError::usage(e.to_string()))?;
    ensure_output_dir(&args.output_dir)?;
    let path = args.output_dir.join("prices.csv");
    write_file(&path, &simulate::panel_to_csv(&panel))?;
    writeln!(out, "wrote {}", path.display()).map_err(|e| CliError::usage(e.to_string()))?;
    Ok(())
}

/// Dispatch a parsed command; returns the process exit code.
pub fn run(cli: Cli, out: &mut impl std::io::Write, err: &mut impl std::io::Write) -> u8 {
    let result = match &cli.command {
        Command::Weights(args) => RunConfig::resolve(args).and_then(|c| cmd_weights(&c, out)),
        Command::Report(args) => RunConfig::resolve(args).and_then(|c| cmd_report(&c, out)),
        Command::Simulate(args) => cmd_simulate(args, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.exit_code
        }
    }
}
