//! Shared fixtures for the integration and acceptance suites.
// Each test target pulls in a different subset of these helpers.
#![allow(dead_code)]

use chrono::NaiveDate;
use hrpfolio::marketdata::ReturnMatrix;
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn mk_returns(values: DMatrix<f64>, names: Vec<String>) -> ReturnMatrix {
    let base = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    ReturnMatrix {
        dates: (0..values.nrows())
            .map(|t| base + chrono::Days::new(t as u64 + 1))
            .collect(),
        anchor_date: base,
        assets: names,
        values,
    }
}

pub fn asset_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("A{i:02}")).collect()
}

pub fn random_returns<R: Rng>(rng: &mut R, t: usize, n: usize, scale: f64) -> ReturnMatrix {
    let values = DMatrix::from_fn(t, n, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        scale * z
    });
    mk_returns(values, asset_names(n))
}

/// Random symmetric positive definite matrix with a safe eigenvalue floor.
pub fn random_spd<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let mut spd = &a * a.transpose();
    for i in 0..n {
        spd[(i, i)] += 0.3 * n as f64;
    }
    // Symmetrize exactly so permutation symmetry checks can be bit-exact.
    for i in 0..n {
        for j in 0..i {
            let v = spd[(i, j)];
            spd[(j, i)] = v;
        }
    }
    spd
}

/// Zero-drift multivariate normal returns with planted correlation blocks.
/// Block b spans a contiguous run of `block_sizes[b]` assets with daily
/// volatility `block_vols[b]`.
pub fn block_returns<R: Rng>(
    rng: &mut R,
    block_sizes: &[usize],
    block_vols: &[f64],
    within_rho: f64,
    between_rho: f64,
    t: usize,
) -> (ReturnMatrix, Vec<usize>) {
    assert_eq!(block_sizes.len(), block_vols.len());
    let n: usize = block_sizes.iter().sum();
    let mut block_of = Vec::with_capacity(n);
    for (b, &size) in block_sizes.iter().enumerate() {
        block_of.extend(std::iter::repeat_n(b, size));
    }
    let corr = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if block_of[i] == block_of[j] {
            within_rho
        } else {
            between_rho
        }
    });
    let l = Cholesky::new(corr).expect("block correlation must be SPD").l();
    let mut values = DMatrix::zeros(t, n);
    for row in 0..t {
        let z = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let correlated = &l * z;
        for i in 0..n {
            values[(row, i)] = block_vols[block_of[i]] * correlated[i];
        }
    }
    (mk_returns(values, asset_names(n)), block_of)
}

/// True when each block occupies a contiguous run of `order`.
pub fn blocks_contiguous(order: &[usize], block_of: &[usize]) -> bool {
    let n_blocks = block_of.iter().max().map_or(0, |m| m + 1);
    for b in 0..n_blocks {
        let positions: Vec<usize> = order
            .iter()
            .enumerate()
            .filter(|(_, &asset)| block_of[asset] == b)
            .map(|(pos, _)| pos)
            .collect();
        let (min, max) = (
            *positions.iter().min().unwrap(),
            *positions.iter().max().unwrap(),
        );
        if max - min + 1 != positions.len() {
            return false;
        }
    }
    true
}
