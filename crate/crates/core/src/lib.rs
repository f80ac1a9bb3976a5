//! Portfolio construction engine built around hierarchical risk parity.
//!
//! The pipeline runs ingestion -> risk model -> allocation -> analytics:
//!
//! * [`marketdata`] loads wide price CSVs, aligns the panel, and computes
//!   daily log returns.
//! * [`riskmodel`] estimates covariance/correlation and the correlation
//!   distance d = sqrt((1 - rho) / 2).
//! * [`hrp`] implements tree clustering, quasi-diagonalization, and
//!   recursive bisection.
//! * [`allocators`] provides the 1/N and maximum-Sharpe benchmarks.
//! * [`analytics`] turns weights into wealth curves and the seven-metric
//!   comparative report.
//! * [`simulate`] generates seeded block-correlated GBM price panels for
//!   testing.
//! * [`export`] renders the file artifacts (CSV matrices, dendrogram
//!   JSON/SVG, report JSON).
//! * [`cli`] wires everything into the `hrpfolio` binary.

pub mod allocators;
pub mod analytics;
pub mod cli;
pub mod export;
pub mod hrp;
pub mod marketdata;
pub mod riskmodel;
pub mod simulate;
pub mod weights;
