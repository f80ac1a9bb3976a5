//! Hierarchical risk parity: tree clustering, quasi-diagonalization, and
//! recursive bisection.
//!
//! The pipeline is deterministic end to end. Distance ties during
//! agglomeration are broken by preferring the merge whose (min, then max)
//! participating node ids are smallest. At each merge the child with the
//! smaller mean leaf row-sum of distances is placed left; this keeps the
//! seriation (and therefore the weights) equivariant under column
//! permutation on tie-free inputs, with the smallest-leaf-id rule as the
//! fallback when the scores tie.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::marketdata::ReturnMatrix;
use crate::riskmodel::{self, RiskModelError};
use crate::weights::{WeightError, WeightVector};

#[derive(Debug, Error)]
pub enum HrpError {
    #[error("clustering needs at least 2 items, have {0}")]
    TooFewItems(usize),
    #[error("distance matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("distance matrix invalid at ({i},{j}): {reason}")]
    InvalidDistance { i: usize, j: usize, reason: String },
    #[error("order is not a permutation of 0..{n}")]
    NotAPermutation { n: usize },
    #[error("member subset is empty")]
    EmptySubset,
    #[error("covariance diagonal entry {0} is not positive")]
    NonPositiveVariance(usize),
    #[error(transparent)]
    RiskModel(#[from] RiskModelError),
    #[error(transparent)]
    Weight(#[from] WeightError),
}

/// Inter-cluster distance rule used during agglomeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    Average,
    /// Lance-Williams Ward update applied directly to the correlation-distance
    /// values, without a squared-Euclidean embedding.
    Ward,
}

impl std::str::FromStr for Linkage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            "ward" => Ok(Linkage::Ward),
            other => Err(format!(
                "unknown linkage `{other}` (expected single|complete|average|ward)"
            )),
        }
    }
}

impl std::fmt::Display for Linkage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
            Linkage::Ward => "ward",
        };
        f.write_str(s)
    }
}

/// One agglomerative merge. Node ids 0..N-1 are leaves; internal nodes take
/// ids N..2N-2 in merge order. `left` is the child holding the smallest leaf id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

/// Stepwise dendrogram: N-1 merges plus the induced leaf seriation.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkageTree {
    n_leaves: usize,
    pub merges: Vec<Merge>,
    pub leaf_order: Vec<usize>,
}

impl LinkageTree {
    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }
}

fn validate_distance(dist: &DMatrix<f64>) -> Result<(), HrpError> {
    let n = dist.nrows();
    if dist.ncols() != n {
        return Err(HrpError::NotSquare {
            rows: n,
            cols: dist.ncols(),
        });
    }
    if n < 2 {
        return Err(HrpError::TooFewItems(n));
    }
    for i in 0..n {
        if dist[(i, i)] != 0.0 {
            return Err(HrpError::InvalidDistance {
                i,
                j: i,
                reason: "nonzero diagonal".into(),
            });
        }
        for j in (i + 1)..n {
            let d = dist[(i, j)];
            if !d.is_finite() || d < 0.0 {
                return Err(HrpError::InvalidDistance {
                    i,
                    j,
                    reason: format!("non-finite or negative value {d}"),
                });
            }
            if d != dist[(j, i)] {
                return Err(HrpError::InvalidDistance {
                    i,
                    j,
                    reason: "asymmetric".into(),
                });
            }
        }
    }
    Ok(())
}

/// Agglomerative clustering of a dissimilarity matrix under the chosen linkage.
pub fn cluster(dist: &DMatrix<f64>, method: Linkage) -> Result<LinkageTree, HrpError> {
    validate_distance(dist)?;
    let n = dist.nrows();

    // Pairwise distances indexed by node id, grown as internal nodes appear.
    let total = 2 * n - 1;
    let mut d = vec![f64::NAN; total * total];
    for i in 0..n {
        for j in 0..n {
            d[i * total + j] = dist[(i, j)];
        }
    }
    let mut active: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; total];
    let mut min_leaf: Vec<usize> = (0..total).collect();
    // Sum of the member leaves' distance-row sums; score = sum / size is a
    // label-free orientation key.
    let mut row_sum = vec![0.0f64; total];
    for (i, slot) in row_sum.iter_mut().enumerate().take(n) {
        *slot = dist.row(i).sum();
    }
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        // Smallest distance; ties by (min id, max id) of the pair.
        let mut best: Option<(f64, usize, usize)> = None;
        for (ai, &a) in active.iter().enumerate() {
            for &b in &active[ai + 1..] {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                let dab = d[lo * total + hi];
                let better = match best {
                    None => true,
                    Some(b) => (dab, lo, hi) < b,
                };
                if better {
                    best = Some((dab, lo, hi));
                }
            }
        }
        let (dist_ab, a, b) = best.expect("at least two active clusters");

        let new_id = n + step;
        let (na, nb) = (size[a], size[b]);
        size[new_id] = na + nb;
        min_leaf[new_id] = min_leaf[a].min(min_leaf[b]);
        row_sum[new_id] = row_sum[a] + row_sum[b];
        let score = |c: usize| row_sum[c] / size[c] as f64;
        let a_first = match score(a).partial_cmp(&score(b)).expect("finite scores") {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => min_leaf[a] <= min_leaf[b],
        };
        let (left, right) = if a_first { (a, b) } else { (b, a) };
        merges.push(Merge {
            left,
            right,
            distance: dist_ab,
            size: na + nb,
        });

        active.retain(|&c| c != a && c != b);
        for &k in &active {
            let dka = d[k.min(a) * total + k.max(a)];
            let dkb = d[k.min(b) * total + k.max(b)];
            let updated = match method {
                Linkage::Single => dka.min(dkb),
                Linkage::Complete => dka.max(dkb),
                Linkage::Average => (na as f64 * dka + nb as f64 * dkb) / (na + nb) as f64,
                Linkage::Ward => {
                    let nk = size[k] as f64;
                    let (na, nb) = (na as f64, nb as f64);
                    (((na + nk) * dka * dka + (nb + nk) * dkb * dkb - nk * dist_ab * dist_ab)
                        / (na + nb + nk))
                        .max(0.0)
                        .sqrt()
                }
            };
            d[k.min(new_id) * total + k.max(new_id)] = updated;
        }
        active.push(new_id);
    }

    let mut tree = LinkageTree {
        n_leaves: n,
        merges,
        leaf_order: Vec::new(),
    };
    tree.leaf_order = leaf_order(&tree);
    Ok(tree)
}

/// Seriation of the leaves: in-order traversal of the final tree, left child
/// before right child.
pub fn leaf_order(tree: &LinkageTree) -> Vec<usize> {
    let n = tree.n_leaves;
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![2 * n - 2];
    while let Some(id) = stack.pop() {
        if id < n {
            order.push(id);
        } else {
            let merge = &tree.merges[id - n];
            // Right pushed first so the left child is visited first.
            stack.push(merge.right);
            stack.push(merge.left);
        }
    }
    order
}

fn check_permutation(order: &[usize], n: usize) -> Result<(), HrpError> {
    if order.len() != n {
        return Err(HrpError::NotAPermutation { n });
    }
    let mut seen = vec![false; n];
    for &p in order {
        if p >= n || seen[p] {
            return Err(HrpError::NotAPermutation { n });
        }
        seen[p] = true;
    }
    Ok(())
}

/// Conjugate the covariance by the seriation permutation: output[a][b] =
/// cov[order[a]][order[b]].
pub fn quasi_diagonalize(cov: &DMatrix<f64>, order: &[usize]) -> Result<DMatrix<f64>, HrpError> {
    let n = cov.nrows();
    check_permutation(order, n)?;
    Ok(DMatrix::from_fn(n, n, |a, b| cov[(order[a], order[b])]))
}

/// Inverse-variance-weighted variance of a subcluster: with w_i proportional
/// to 1/cov[i][i] over `members`, returns w' Sigma w restricted to the subset.
pub fn cluster_variance(cov: &DMatrix<f64>, members: &[usize]) -> Result<f64, HrpError> {
    if members.is_empty() {
        return Err(HrpError::EmptySubset);
    }
    let mut inv = Vec::with_capacity(members.len());
    for &i in members {
        let v = cov[(i, i)];
        if v <= 0.0 || !v.is_finite() {
            return Err(HrpError::NonPositiveVariance(i));
        }
        inv.push(1.0 / v);
    }
    let norm: f64 = inv.iter().sum();
    let w: Vec<f64> = inv.iter().map(|x| x / norm).collect();
    let mut var = 0.0;
    for (a, &i) in members.iter().enumerate() {
        for (b, &j) in members.iter().enumerate() {
            var += w[a] * w[b] * cov[(i, j)];
        }
    }
    Ok(var)
}

/// Top-down recursive bisection over the seriated order.
///
/// Each contiguous range splits into its first ceil(n/2) and remaining
/// floor(n/2) elements; the left half's weight is scaled by
/// alpha = var_R / (var_L + var_R) and the right half's by 1 - alpha.
/// Returned weights are in original asset index space.
pub fn recursive_bisection(cov: &DMatrix<f64>, order: &[usize]) -> Result<Vec<f64>, HrpError> {
    let n = cov.nrows();
    check_permutation(order, n)?;
    let mut w = vec![1.0f64; n]; // indexed by position in `order`
    let mut ranges = vec![(0usize, n)];
    while let Some((lo, hi)) = ranges.pop() {
        let len = hi - lo;
        if len < 2 {
            continue;
        }
        let mid = lo + len.div_ceil(2);
        let var_l = cluster_variance(cov, &order[lo..mid])?;
        let var_r = cluster_variance(cov, &order[mid..hi])?;
        let alpha = var_r / (var_l + var_r);
        for item in w[lo..mid].iter_mut() {
            *item *= alpha;
        }
        for item in w[mid..hi].iter_mut() {
            *item *= 1.0 - alpha;
        }
        ranges.push((lo, mid));
        ranges.push((mid, hi));
    }
    let mut by_asset = vec![0.0; n];
    for (pos, &asset) in order.iter().enumerate() {
        by_asset[asset] = w[pos];
    }
    Ok(by_asset)
}

#[derive(Debug, Clone)]
pub struct HrpConfig {
    pub linkage: Linkage,
}

impl Default for HrpConfig {
    fn default() -> Self {
        HrpConfig {
            linkage: Linkage::Single,
        }
    }
}

/// Full pipeline: estimate the risk model, cluster on correlation distance,
/// seriate, and allocate by recursive bisection.
pub fn hrp_weights(returns: &ReturnMatrix, config: &HrpConfig) -> Result<WeightVector, HrpError> {
    let model = riskmodel::estimate(returns)?;
    hrp_weights_from_model(&model.covariance, &model.distance, &returns.assets, config)
}

/// Same pipeline starting from an already-estimated covariance/distance pair.
pub fn hrp_weights_from_model(
    cov: &DMatrix<f64>,
    distance: &DMatrix<f64>,
    assets: &[String],
    config: &HrpConfig,
) -> Result<WeightVector, HrpError> {
    let tree = cluster(distance, config.linkage)?;
    let weights = recursive_bisection(cov, &tree.leaf_order)?;
    Ok(WeightVector::new(assets.to_vec(), weights)?)
}

/// Serializable dendrogram: the data behind the tree figure.
#[derive(Debug, Serialize)]
pub struct DendrogramExport {
    pub merges: Vec<(usize, usize, f64, usize)>,
    pub leaf_order: Vec<usize>,
    pub labels: Vec<String>,
}

impl DendrogramExport {
    pub fn new(tree: &LinkageTree, labels: &[String]) -> Self {
        DendrogramExport {
            merges: tree
                .merges
                .iter()
                .map(|m| (m.left, m.right, m.distance, m.size))
                .collect(),
            leaf_order: tree.leaf_order.clone(),
            labels: labels.to_vec(),
        }
    }
}
