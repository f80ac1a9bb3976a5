//! Acceptance suite. Each test covers one numbered criterion, pins its
//! tolerance, and prints a single pass line (a failed assertion marks the
//! criterion failed). Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines.

mod common;

use std::time::{Duration, Instant};

use common::*;
use hrpfolio::analytics::{self, PerformanceReport, REPORT_CSV_HEADER};
use hrpfolio::hrp::{self, HrpConfig, Linkage};
use hrpfolio::riskmodel::{self, distance_from_correlation};
use hrpfolio::allocators;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pass(id: u32, what: &str, elapsed: Duration, budget: Duration) {
    assert!(
        elapsed <= budget,
        "criterion {id} exceeded runtime budget: {elapsed:?} > {budget:?}"
    );
    println!("criterion {id} PASS ({elapsed:.2?}): {what}");
}

#[test]
fn criterion_1_distance_transform_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..1_000_000 {
        let rho: f64 = rng.gen_range(-1.0..=1.0);
        let d = distance_from_correlation(rho).unwrap();
        let oracle = (0.5 - rho / 2.0).sqrt();
        assert!((d - oracle).abs() <= 1e-15, "rho={rho} d={d} oracle={oracle}");
    }
    assert_eq!(distance_from_correlation(1.0).unwrap(), 0.0);
    assert_eq!(distance_from_correlation(-1.0).unwrap(), 1.0);
    pass(
        1,
        "distance transform matches independent recomputation to 1e-15 on 1e6 samples",
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_2_two_asset_hrp_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for trial in 0..1000 {
        let t = rng.gen_range(20..120);
        let (s1, s2) = (rng.gen_range(0.002..0.03), rng.gen_range(0.002..0.03));
        let values = DMatrix::from_fn(t, 2, |_, i| {
            let scale = if i == 0 { s1 } else { s2 };
            scale * rng.gen_range(-1.0f64..1.0)
        });
        let returns = mk_returns(values, asset_names(2));
        let model = riskmodel::estimate(&returns).unwrap();
        let (v1, v2) = (model.covariance[(0, 0)], model.covariance[(1, 1)]);
        let w = hrp::hrp_weights(&returns, &HrpConfig::default()).unwrap();
        let expected = [v2 / (v1 + v2), v1 / (v1 + v2)];
        for (got, want) in w.weights.iter().zip(expected) {
            assert!(
                (got - want).abs() < 1e-10,
                "trial {trial}: weight {got} vs inverse-variance {want}"
            );
        }
    }
    pass(
        2,
        "1000 two-asset instances equal the inverse-variance split within 1e-10",
        start.elapsed(),
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_3_planted_block_clustering() {
    let start = Instant::now();
    let mut contiguous = 0;
    let mut low_var_heavier = 0;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + trial);
        let n_blocks = 2 + (trial as usize % 2);
        let n: usize = rng.gen_range(6..=12);
        let mut sizes = vec![n / n_blocks; n_blocks];
        sizes[0] += n % n_blocks;
        let vols: Vec<f64> = (0..n_blocks).map(|b| 0.01 * (1.0 + b as f64)).collect();
        let (returns, block_of) = block_returns(&mut rng, &sizes, &vols, 0.8, 0.1, 2000);
        let model = riskmodel::estimate(&returns).unwrap();
        let tree = hrp::cluster(&model.distance, Linkage::Single).unwrap();
        if blocks_contiguous(&tree.leaf_order, &block_of) {
            contiguous += 1;
        }
        let weights = hrp::hrp_weights(&returns, &HrpConfig::default()).unwrap();
        let block_weight = |b: usize| -> f64 {
            weights
                .weights
                .iter()
                .enumerate()
                .filter(|(i, _)| block_of[*i] == b)
                .map(|(_, w)| w)
                .sum()
        };
        // Block 0 has the lowest volatility, the last block the highest.
        if block_weight(0) > block_weight(n_blocks - 1) {
            low_var_heavier += 1;
        }
    }
    assert!(contiguous >= 99, "only {contiguous}/100 trials kept blocks contiguous");
    assert!(
        low_var_heavier >= 95,
        "only {low_var_heavier}/100 trials favored the low-variance block"
    );
    pass(
        3,
        "planted blocks contiguous in >=99/100 and low-variance block heavier in >=95/100",
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_4_quasi_diagonalization_validity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..100 {
        let n = rng.gen_range(2..=20);
        let cov = random_spd(&mut rng, n);
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let permuted = hrp::quasi_diagonalize(&cov, &order).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(permuted[(i, j)], permuted[(j, i)], "symmetry broken");
            }
        }
        let mut eig_a = cov.clone().symmetric_eigen().eigenvalues.as_slice().to_vec();
        let mut eig_b = permuted.symmetric_eigen().eigenvalues.as_slice().to_vec();
        eig_a.sort_by(|a, b| a.partial_cmp(b).unwrap());
        eig_b.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in eig_a.iter().zip(&eig_b) {
            assert!((a - b).abs() < 1e-9, "eigenvalue drift {a} vs {b}");
        }
        let identity: Vec<usize> = (0..n).collect();
        assert_eq!(hrp::quasi_diagonalize(&cov, &identity).unwrap(), cov);
    }
    pass(
        4,
        "100 random conjugations preserve eigenvalues (1e-9) and symmetry; identity is fixed",
        start.elapsed(),
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_5_hrp_weight_invariants() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for trial in 0..500 {
        let n = rng.gen_range(2..=30);
        let returns = random_returns(&mut rng, 60, n, 0.01);
        let w = hrp::hrp_weights(&returns, &HrpConfig::default()).unwrap();
        let sum: f64 = w.weights.iter().sum();
        assert!((sum - 1.0).abs() < 1e-10, "trial {trial}: sum {sum}");
        assert!(w.weights.iter().all(|&x| x > 0.0), "trial {trial}: nonpositive weight");

        for c in [0.1, 10.0] {
            let scaled = mk_returns(returns.values.scale(c), returns.assets.clone());
            let ws = hrp::hrp_weights(&scaled, &HrpConfig::default()).unwrap();
            for i in 0..n {
                assert!(
                    (w.weights[i] - ws.weights[i]).abs() < 1e-10,
                    "trial {trial}: scale {c} broke invariance at {i}"
                );
            }
        }

        // Column-permutation equivariance on (almost surely) tie-free data.
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let shuffled_values = DMatrix::from_fn(returns.values.nrows(), n, |t, j| {
            returns.values[(t, perm[j])]
        });
        let shuffled_names: Vec<String> = perm.iter().map(|&p| returns.assets[p].clone()).collect();
        let wp = hrp::hrp_weights(&mk_returns(shuffled_values, shuffled_names), &HrpConfig::default())
            .unwrap();
        for (j, &p) in perm.iter().enumerate() {
            assert!(
                (wp.weights[j] - w.weights[p]).abs() < 1e-10,
                "trial {trial}: permutation equivariance broke at column {j}"
            );
        }
    }
    pass(
        5,
        "500 instances: positive normalized weights, scale-invariant, permutation-equivariant",
        start.elapsed(),
        Duration::from_secs(60),
    );
}

fn sharpe(mu: &DVector<f64>, cov: &DMatrix<f64>, w: &[f64], rf: f64) -> f64 {
    let wv = DVector::from_row_slice(w);
    (wv.dot(mu) - rf) / wv.dot(&(cov * &wv)).sqrt()
}

/// Best Sharpe over the grid w1, w2 in [lo, hi] step 0.001, w3 = 1 - w1 - w2,
/// optionally restricted to the simplex. Uses the expanded quadratic form so
/// the 9e6-point sweep stays cheap.
fn grid_best_sharpe(mu: &DVector<f64>, cov: &DMatrix<f64>, lo: f64, hi: f64, simplex: bool) -> f64 {
    let (m1, m2, m3) = (mu[0], mu[1], mu[2]);
    // var(a, b) with w = (a, b, 1 - a - b) expanded into coefficients.
    let qa = cov[(0, 0)] + cov[(2, 2)] - 2.0 * cov[(0, 2)];
    let qb = cov[(1, 1)] + cov[(2, 2)] - 2.0 * cov[(1, 2)];
    let qab = 2.0 * (cov[(0, 1)] + cov[(2, 2)] - cov[(0, 2)] - cov[(1, 2)]);
    let la = 2.0 * (cov[(0, 2)] - cov[(2, 2)]);
    let lb = 2.0 * (cov[(1, 2)] - cov[(2, 2)]);
    let c0 = cov[(2, 2)];

    let steps = ((hi - lo) / 0.001).round() as i64;
    let mut best = f64::MIN;
    for ia in 0..=steps {
        let a = lo + 0.001 * ia as f64;
        let ib_max = if simplex {
            (((1.0 - a) - lo) / 0.001).floor() as i64
        } else {
            steps
        };
        let a_num = m3 + a * (m1 - m3);
        let a_var = qa * a * a + la * a + c0;
        for ib in 0..=ib_max {
            let b = lo + 0.001 * ib as f64;
            let num = a_num + b * (m2 - m3);
            let var = a_var + qb * b * b + qab * a * b + lb * b;
            let s = num / var.sqrt();
            if s > best {
                best = s;
            }
        }
    }
    best
}

#[test]
fn criterion_6_tangency_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for trial in 0..200 {
        let cov = random_spd(&mut rng, 3);
        let mu_vals = [
            rng.gen_range(0.02..0.2),
            rng.gen_range(0.02..0.2),
            rng.gen_range(0.02..0.2),
        ];
        let mu = allocators::ExpectedReturns {
            assets: asset_names(3),
            mu: DVector::from_row_slice(&mu_vals),
        };
        let rf = 0.0;

        let closed = allocators::tangency_weights(&mu, &cov, rf).unwrap();
        let closed_sharpe = sharpe(&mu.mu, &cov, &closed.weights, rf);

        // Grid over w1, w2 in [-1, 2] step 0.001, w3 = 1 - w1 - w2.
        let grid_best = grid_best_sharpe(&mu.mu, &cov, -1.0, 2.0, false);
        assert!(
            grid_best <= closed_sharpe + 1e-6,
            "trial {trial}: grid Sharpe {grid_best} beats closed form {closed_sharpe}"
        );

        // Long-only active set vs the 0.001-step simplex grid.
        let long_only = allocators::max_sharpe_long_only(&mu, &cov, rf).unwrap();
        assert!(!long_only.used_fallback);
        let lo_sharpe = sharpe(&mu.mu, &cov, &long_only.weights.weights, rf);
        let simplex_best = grid_best_sharpe(&mu.mu, &cov, 0.0, 1.0, true);
        assert!(
            (lo_sharpe - simplex_best).abs() <= 1e-4,
            "trial {trial}: long-only Sharpe {lo_sharpe} vs simplex grid {simplex_best}"
        );
    }
    pass(
        6,
        "200 SPD instances: closed form beats the shorts grid; long-only matches simplex grid to 1e-4",
        start.elapsed(),
        Duration::from_secs(120),
    );
}

// Naive metric recomputations, kept as plain loops independent of the
// analytics implementations.
mod naive {
    pub fn annual_return(r: &[f64], ppy: f64) -> f64 {
        let mut total = 0.0;
        for x in r {
            total += x;
        }
        (ppy * total / r.len() as f64).exp() - 1.0
    }

    pub fn volatility(r: &[f64], ppy: f64) -> f64 {
        let mut total = 0.0;
        for x in r {
            total += x;
        }
        let mean = total / r.len() as f64;
        let mut ss = 0.0;
        for x in r {
            ss += (x - mean) * (x - mean);
        }
        (ss / (r.len() - 1) as f64).sqrt() * ppy.sqrt()
    }

    pub fn sharpe(r: &[f64], rf: f64, ppy: f64) -> f64 {
        (annual_return(r, ppy) - rf) / volatility(r, ppy)
    }

    pub fn sortino(r: &[f64], rf: f64, ppy: f64) -> f64 {
        let rf_daily = rf / ppy;
        let mut ss = 0.0;
        for x in r {
            let e = x - rf_daily;
            if e < 0.0 {
                ss += e * e;
            }
        }
        let dd = (ss / r.len() as f64).sqrt() * ppy.sqrt();
        (annual_return(r, ppy) - rf) / dd
    }

    pub fn max_drawdown(r: &[f64]) -> f64 {
        let mut wealth = vec![1.0];
        let mut cum = 0.0;
        for x in r {
            cum += x;
            wealth.push(cum.exp());
        }
        let mut peak = 0.0f64;
        let mut worst = 0.0f64;
        for w in wealth {
            if w > peak {
                peak = w;
            }
            let dd = w / peak - 1.0;
            if dd < worst {
                worst = dd;
            }
        }
        worst
    }

    pub fn calmar(r: &[f64], ppy: f64) -> f64 {
        annual_return(r, ppy) / max_drawdown(r).abs()
    }

    pub fn tracking_error(r: &[f64], b: &[f64], ppy: f64) -> f64 {
        let diff: Vec<f64> = r.iter().zip(b).map(|(x, y)| x - y).collect();
        volatility(&diff, ppy)
    }
}

#[test]
fn criterion_7_metric_oracle_equivalence() {
    let start = Instant::now();
    let ppy = 252.0;
    let rf = 0.02;
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for _ in 0..100 {
        let len = rng.gen_range(10..400);
        let r: Vec<f64> = (0..len).map(|_| rng.gen_range(-0.03..0.03)).collect();
        let b: Vec<f64> = (0..len).map(|_| rng.gen_range(-0.03..0.03)).collect();
        let wealth = analytics::wealth_values(&r);
        let close = |a: f64, b: f64| (a - b).abs() < 1e-10;
        assert!(close(
            analytics::annualized_return(&r, ppy).unwrap(),
            naive::annual_return(&r, ppy)
        ));
        assert!(close(
            analytics::annualized_volatility(&r, ppy).unwrap(),
            naive::volatility(&r, ppy)
        ));
        assert!(close(
            analytics::sharpe_ratio(&r, rf, ppy).unwrap(),
            naive::sharpe(&r, rf, ppy)
        ));
        assert!(close(
            analytics::sortino_ratio(&r, rf, ppy).unwrap(),
            naive::sortino(&r, rf, ppy)
        ));
        assert!(close(
            analytics::max_drawdown(&wealth).unwrap(),
            naive::max_drawdown(&r)
        ));
        assert!(close(
            analytics::calmar_ratio(&r, ppy).unwrap(),
            naive::calmar(&r, ppy)
        ));
        assert!(close(
            analytics::tracking_error(&r, &b, ppy).unwrap(),
            naive::tracking_error(&r, &b, ppy)
        ));
    }
    // Hand-traced fixtures.
    assert!(
        (analytics::max_drawdown(&[1.0, 1.1, 0.99, 1.2]).unwrap() - (0.99 / 1.1 - 1.0)).abs()
            < 1e-15
    );
    let r = [0.01, -0.02, 0.005];
    assert_eq!(analytics::tracking_error(&r, &r, ppy).unwrap(), 0.0);
    pass(
        7,
        "all seven metrics agree with naive-loop recomputation to 1e-10 on 100 series",
        start.elapsed(),
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_8_reported_table_consistency() {
    let start = Instant::now();
    // Published (annual return, volatility, Sharpe) triples.
    let hrp_row = (-0.003, 0.155, -0.278);
    let max_sharpe_row = (0.142, 0.239, 0.426);
    for (ret, vol, sharpe) in [hrp_row, max_sharpe_row] {
        let rf = ret - sharpe * vol;
        assert!(
            (0.035..=0.045).contains(&rf),
            "back-solved rf {rf} out of [0.035, 0.045]"
        );
    }

    // Formatter reproduces the exact column header and 3-decimal layout.
    let row = |name: &str, vals: [f64; 6], te: Option<f64>| PerformanceReport {
        portfolio_name: name.to_string(),
        annual_return: vals[0],
        volatility: vals[1],
        sharpe: Some(vals[2]),
        sortino: Some(vals[3]),
        calmar: Some(vals[4]),
        max_drawdown: vals[5],
        tracking_error: te,
        notes: Vec::new(),
    };
    let rows = vec![
        row("HRP", [-0.003, 0.155, -0.278, -0.299, -0.096, -0.452], Some(0.037)),
        row("Max Sharpe", [0.142, 0.239, 0.426, 0.529, 0.205, -0.496], Some(0.164)),
        row("1/N", [-0.007, 0.175, -0.274, -0.293, -0.096, -0.500], None),
    ];
    let csv = analytics::report_csv(&rows);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], REPORT_CSV_HEADER);
    assert_eq!(lines[1], "HRP,-0.003,0.155,-0.278,-0.299,-0.096,-0.452,0.037");
    assert_eq!(lines[2], "Max Sharpe,0.142,0.239,0.426,0.529,0.205,-0.496,0.164");
    assert_eq!(lines[3], "1/N,-0.007,0.175,-0.274,-0.293,-0.096,-0.500,--");

    // Standard-definition Calmar for the first row disagrees with the
    // published -0.096; the divergence is real and must stay visible.
    let standard_calmar: f64 = -0.003 / 0.452;
    assert!((standard_calmar - (-0.096)).abs() > 0.05);
    pass(
        8,
        "back-solved rf in [0.035, 0.045]; exact header and 3-decimal layout; Calmar discrepancy holds",
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_9_end_to_end_determinism() {
    use std::process::Command;
    let start = Instant::now();
    let exe = env!("CARGO_BIN_EXE_hrpfolio");
    let tmp = tempfile::tempdir().unwrap();
    let sim_dir = tmp.path().join("sim");
    let status = Command::new(exe)
        .args([
            "simulate",
            "--n-assets",
            "8",
            "--days",
            "250",
            "--seed",
            "42",
            "--output-dir",
        ])
        .arg(&sim_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let prices = sim_dir.join("prices.csv");

    let artifacts = [
        "report.json",
        "report.csv",
        "wealth.csv",
        "dendrogram.json",
        "distance_matrix.csv",
        "quasi_diag_cov.csv",
    ];
    let mut outputs: Vec<Vec<Vec<u8>>> = Vec::new();
    for run in 0..2 {
        let out_dir = tmp.path().join(format!("run{run}"));
        let output = Command::new(exe)
            .args(["report", "--rf", "0.04", "--input"])
            .arg(&prices)
            .arg("--output-dir")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
        outputs.push(
            artifacts
                .iter()
                .map(|name| std::fs::read(out_dir.join(name)).unwrap())
                .collect(),
        );
    }
    for (name, (a, b)) in artifacts.iter().zip(outputs[0].iter().zip(&outputs[1])) {
        assert_eq!(a, b, "artifact {name} differs between identical runs");
    }
    pass(
        9,
        "report on a seeded simulate output is byte-identical across runs",
        start.elapsed(),
        Duration::from_secs(10),
    );
}
