//! File exporters: labeled matrix CSVs, weight CSVs, wealth-series CSV,
//! report JSON, and a dependency-light SVG dendrogram.
//!
//! Numeric CSV cells use the shortest round-trip float representation so the
//! artifacts re-parse without loss; the report CSV alone uses the 3-decimal
//! table layout (see [`crate::analytics::report_csv`]).

use nalgebra::DMatrix;
use serde::Serialize;

use crate::analytics::{PerformanceReport, WealthSeries};
use crate::hrp::LinkageTree;
use crate::weights::WeightVector;

/// Square matrix with tickers as row and column headers.
pub fn matrix_csv(labels: &[String], matrix: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for label in labels {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for (i, label) in labels.iter().enumerate() {
        out.push_str(label);
        for j in 0..labels.len() {
            out.push(',');
            out.push_str(&matrix[(i, j)].to_string());
        }
        out.push('\n');
    }
    out
}

/// `ticker,weight` sorted by descending weight.
pub fn weights_csv(w: &WeightVector) -> String {
    let mut out = String::from("ticker,weight\n");
    for (ticker, weight) in w.sorted_descending() {
        out.push_str(&format!("{ticker},{weight}\n"));
    }
    out
}

/// `date,<strategy1>,<strategy2>,...` wealth panel; all series must share dates.
pub fn wealth_csv(curves: &[(String, WealthSeries)]) -> String {
    let mut out = String::from("date");
    for (name, _) in curves {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    if let Some((_, first)) = curves.first() {
        for (t, date) in first.dates.iter().enumerate() {
            out.push_str(&date.format("%Y-%m-%d").to_string());
            for (_, series) in curves {
                out.push(',');
                out.push_str(&series.wealth[t].to_string());
            }
            out.push('\n');
        }
    }
    out
}

/// Conventions and configuration echoed alongside the metric rows.
#[derive(Debug, Serialize)]
pub struct ReportMetadata {
    pub rf: f64,
    pub periods_per_year: f64,
    pub linkage: String,
    pub max_sharpe_variant: String,
    pub conventions: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ReportDocument<'a> {
    pub metadata: ReportMetadata,
    pub rows: &'a [PerformanceReport],
}

pub fn report_json(doc: &ReportDocument) -> String {
    serde_json::to_string_pretty(doc).expect("report serialization cannot fail")
}

/// Straight-line SVG rendering of the dendrogram: leaves along the bottom in
/// seriation order, merges drawn as rectilinear elbows at their distance.
pub fn dendrogram_svg(tree: &LinkageTree, labels: &[String]) -> String {
    let n = tree.n_leaves();
    let leaf_gap = 40.0;
    let label_band = 70.0;
    let plot_h = 300.0;
    let margin = 40.0;
    let width = margin * 2.0 + leaf_gap * (n as f64 - 1.0);
    let height = margin + plot_h + label_band;

    let max_dist = tree
        .merges
        .iter()
        .map(|m| m.distance)
        .fold(f64::MIN, f64::max)
        .max(1e-12);
    let y_of = |d: f64| margin + plot_h * (1.0 - d / max_dist);

    // x coordinate and height per node id.
    let total = 2 * n - 1;
    let mut x = vec![0.0f64; total];
    let mut h = vec![0.0f64; total];
    for (pos, &leaf) in tree.leaf_order.iter().enumerate() {
        x[leaf] = margin + leaf_gap * pos as f64;
    }
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"monospace\" font-size=\"11\">\n"
    ));
    // Height axis.
    out.push_str(&format!(
        "  <line x1=\"{m}\" y1=\"{top}\" x2=\"{m}\" y2=\"{bot}\" stroke=\"#999\"/>\n",
        m = margin * 0.5,
        top = y_of(max_dist),
        bot = y_of(0.0)
    ));
    for tick in 0..=4 {
        let d = max_dist * tick as f64 / 4.0;
        out.push_str(&format!(
            "  <text x=\"2\" y=\"{y}\" fill=\"#666\">{d:.2}</text>\n",
            y = y_of(d) + 4.0
        ));
    }
    for (k, merge) in tree.merges.iter().enumerate() {
        let id = n + k;
        let (xl, xr) = (x[merge.left], x[merge.right]);
        let y = y_of(merge.distance);
        out.push_str(&format!(
            "  <path d=\"M {xl} {yl} L {xl} {y} L {xr} {y} L {xr} {yr}\" \
             fill=\"none\" stroke=\"#346\" stroke-width=\"1.5\"/>\n",
            yl = y_of(h[merge.left]),
            yr = y_of(h[merge.right]),
        ));
        x[id] = (xl + xr) / 2.0;
        h[id] = merge.distance;
    }
    for (pos, &leaf) in tree.leaf_order.iter().enumerate() {
        let lx = margin + leaf_gap * pos as f64;
        out.push_str(&format!(
            "  <text x=\"{lx}\" y=\"{ly}\" transform=\"rotate(90 {lx} {ly})\" fill=\"#222\">{label}</text>\n",
            ly = margin + plot_h + 12.0,
            label = labels[leaf],
        ));
    }
    out.push_str("</svg>\n");
    out
}
