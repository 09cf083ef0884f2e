//! Directed spillover networks and their measures: density, weighted
//! degrees, PageRank, maximum spanning arborescence, Jaccard similarity,
//! and the power-matrix sum.

mod arborescence;
mod pagerank;
mod power;

pub use arborescence::{max_spanning_arborescence, Arborescence, TreePath};
pub use pagerank::{pagerank, pagerank_weights, PageRankParams};
pub use power::{power_sum, power_sum_weights, PowerSum, PowerSumParams};

use chrono::NaiveDate;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Date span covered by one network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

/// Weighted directed network over named vertices, with the bootstrap
/// significance mask alongside the raw weights. `weights[(i, j)]` carries the
/// normalized transfer entropy from vertex i to vertex j; the diagonal is
/// zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpilloverNetwork {
    pub labels: Vec<String>,
    /// Raw transfer entropy in bits, same layout as `weights`.
    pub te_bits: DMatrix<f64>,
    /// Normalized transfer entropy in [0, 1], zero diagonal.
    pub weights: DMatrix<f64>,
    /// Bootstrap p-values; diagonal fixed at 1.
    pub pvalues: DMatrix<f64>,
    /// `pvalues[(i, j)] < alpha`, diagonal false.
    pub significant: DMatrix<bool>,
    pub alpha: f64,
    pub window: Option<DateWindow>,
    /// Vertices excluded from estimation (degenerate in this span); their
    /// rows and columns are zero-weight and insignificant.
    pub excluded: Vec<String>,
}

impl SpilloverNetwork {
    /// Assemble a network from the estimate matrices, deriving the
    /// significance mask from `pvalues < alpha`.
    pub fn build_network(
        labels: Vec<String>,
        te_norm: DMatrix<f64>,
        pvalues: DMatrix<f64>,
        alpha: f64,
    ) -> Result<Self> {
        let n = labels.len();
        if te_norm.nrows() != n || te_norm.ncols() != n {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "weights are {}x{} for {} labels",
                    te_norm.nrows(),
                    te_norm.ncols(),
                    n
                ),
            });
        }
        if pvalues.nrows() != n || pvalues.ncols() != n {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "pvalues are {}x{} for {} labels",
                    pvalues.nrows(),
                    pvalues.ncols(),
                    n
                ),
            });
        }
        if !(0.0..1.0).contains(&alpha) || alpha <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                detail: format!("{alpha} outside (0, 1)"),
            });
        }
        for i in 0..n {
            if te_norm[(i, i)] != 0.0 {
                return Err(Error::InvalidParameter {
                    name: "weights",
                    detail: format!("nonzero diagonal at {}", labels[i]),
                });
            }
            for j in 0..n {
                let w = te_norm[(i, j)];
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::InvalidParameter {
                        name: "weights",
                        detail: format!("weight {w} at ({}, {}) outside [0, 1]", labels[i], labels[j]),
                    });
                }
            }
        }
        let significant = DMatrix::from_fn(n, n, |i, j| i != j && pvalues[(i, j)] < alpha);
        let mut pvalues = pvalues;
        for i in 0..n {
            pvalues[(i, i)] = 1.0; // no self-edge estimate
        }
        Ok(Self {
            labels,
            te_bits: DMatrix::zeros(n, n),
            weights: te_norm,
            pvalues,
            significant,
            alpha,
            window: None,
            excluded: Vec::new(),
        })
    }

    pub fn with_te_bits(mut self, te_bits: DMatrix<f64>) -> Self {
        self.te_bits = te_bits;
        self
    }

    pub fn with_window(mut self, window: DateWindow) -> Self {
        self.window = Some(window);
        self
    }

    pub fn with_excluded(mut self, excluded: Vec<String>) -> Self {
        self.excluded = excluded;
        self
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Weight matrix of the requested view: the raw weights, or the weights
    /// with insignificant entries zeroed.
    pub fn view(&self, filtered: bool) -> DMatrix<f64> {
        if filtered {
            DMatrix::from_fn(self.n(), self.n(), |i, j| {
                if self.significant[(i, j)] {
                    self.weights[(i, j)]
                } else {
                    0.0
                }
            })
        } else {
            self.weights.clone()
        }
    }

    /// Count of significant directed edges.
    pub fn significant_edge_count(&self) -> usize {
        self.significant.iter().filter(|&&b| b).count()
    }
}

/// Total edge weight over n(n-1) possible directed pairs.
pub fn density(net: &SpilloverNetwork, filtered: bool) -> Result<f64> {
    let n = net.n();
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "network density",
            needed: 2,
            have: n,
        });
    }
    let sum: f64 = net.view(filtered).iter().sum();
    Ok(sum / (n * (n - 1)) as f64)
}

/// Per-vertex weighted in- and out-degrees.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DegreeTable {
    pub in_degree: Vec<f64>,
    pub out_degree: Vec<f64>,
}

/// `in_i = sum_j w_ji`, `out_i = sum_j w_ij`.
pub fn weighted_degrees(net: &SpilloverNetwork, filtered: bool) -> DegreeTable {
    let w = net.view(filtered);
    let n = net.n();
    let mut in_degree = vec![0.0; n];
    let mut out_degree = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            out_degree[i] += w[(i, j)];
            in_degree[j] += w[(i, j)];
        }
    }
    DegreeTable {
        in_degree,
        out_degree,
    }
}

/// Intersection-over-union of the two networks' unweighted edge sets
/// (significant edges when `filtered`, positive-weight edges otherwise).
/// Two empty edge sets count as identical (similarity 1).
pub fn jaccard(a: &SpilloverNetwork, b: &SpilloverNetwork, filtered: bool) -> Result<f64> {
    if a.labels != b.labels {
        return Err(Error::LabelMismatch {
            detail: "jaccard requires identical vertex sets".into(),
        });
    }
    let n = a.n();
    let edge = |net: &SpilloverNetwork, i: usize, j: usize| {
        if filtered {
            net.significant[(i, j)]
        } else {
            net.weights[(i, j)] > 0.0
        }
    };
    let mut intersection = 0usize;
    let mut union = 0usize;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let ea = edge(a, i, j);
            let eb = edge(b, i, j);
            if ea && eb {
                intersection += 1;
            }
            if ea || eb {
                union += 1;
            }
        }
    }
    if union == 0 {
        Ok(1.0)
    } else {
        Ok(intersection as f64 / union as f64)
    }
}

/// One entry of a descending influencer ranking.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RankedVertex {
    pub label: String,
    pub score: f64,
}

/// Top-k rankings for the influencer tables. The PageRank ranking here runs
/// on the reversed edge directions, so it scores vertices by how much flow
/// they originate; that is the hub-identification reading, and it agrees
/// with the out-degree ranking on star fixtures.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct InfluencerReport {
    pub pagerank: Vec<RankedVertex>,
    pub in_degree: Vec<RankedVertex>,
    pub out_degree: Vec<RankedVertex>,
}

fn rank_descending(labels: &[String], scores: &[f64], k: usize) -> Vec<RankedVertex> {
    let mut idx: Vec<usize> = (0..labels.len()).collect();
    idx.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| labels[a].cmp(&labels[b]))
    });
    idx.into_iter()
        .take(k)
        .map(|i| RankedVertex {
            label: labels[i].clone(),
            score: scores[i],
        })
        .collect()
}

/// Descending top-k rankings by source PageRank, weighted in-degree, and
/// weighted out-degree. Ties break deterministically by label.
pub fn top_influencers(
    net: &SpilloverNetwork,
    k: usize,
    filtered: bool,
) -> Result<InfluencerReport> {
    if k > net.n() {
        return Err(Error::InvalidParameter {
            name: "k",
            detail: format!("top-{k} requested on {} vertices", net.n()),
        });
    }
    let degrees = weighted_degrees(net, filtered);
    let reversed = net.view(filtered).transpose();
    let pr = pagerank_weights(&reversed, &PageRankParams::default())?;
    Ok(InfluencerReport {
        pagerank: rank_descending(&net.labels, &pr, k),
        in_degree: rank_descending(&net.labels, &degrees.in_degree, k),
        out_degree: rank_descending(&net.labels, &degrees.out_degree, k),
    })
}

#[cfg(test)]
pub(crate) fn test_network(labels: &[&str], weights: DMatrix<f64>) -> SpilloverNetwork {
    let n = labels.len();
    SpilloverNetwork::build_network(
        labels.iter().map(|s| s.to_string()).collect(),
        weights,
        DMatrix::zeros(n, n),
        0.10,
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn star(n: usize, w: f64) -> SpilloverNetwork {
        // vertex 0 sends weight w to everyone else
        let weights = DMatrix::from_fn(n, n, |i, j| if i == 0 && j != 0 { w } else { 0.0 });
        let labels: Vec<String> = (0..n).map(|i| format!("V{i:02}")).collect();
        SpilloverNetwork::build_network(labels, weights, DMatrix::zeros(n, n), 0.10).unwrap()
    }

    #[test]
    fn build_rejects_nonzero_diagonal() {
        let w = DMatrix::from_element(2, 2, 0.5);
        assert!(SpilloverNetwork::build_network(
            vec!["A".into(), "B".into()],
            w,
            DMatrix::zeros(2, 2),
            0.1
        )
        .is_err());
    }

    #[test]
    fn significance_mask_strict_threshold() {
        let w = DMatrix::from_fn(2, 2, |i, j| if i != j { 0.5 } else { 0.0 });
        let p = DMatrix::from_fn(2, 2, |i, j| if (i, j) == (0, 1) { 0.05 } else { 0.10 });
        let net =
            SpilloverNetwork::build_network(vec!["A".into(), "B".into()], w, p, 0.10).unwrap();
        assert!(net.significant[(0, 1)]);
        assert!(!net.significant[(1, 0)]); // p == alpha is not significant
        assert_eq!(net.significant_edge_count(), 1);
    }

    #[test]
    fn all_p_half_empty_filtered_set() {
        let w = DMatrix::from_fn(3, 3, |i, j| if i != j { 0.5 } else { 0.0 });
        let p = DMatrix::from_element(3, 3, 0.5);
        let net = SpilloverNetwork::build_network(
            vec!["A".into(), "B".into(), "C".into()],
            w,
            p,
            0.10,
        )
        .unwrap();
        assert_eq!(net.significant_edge_count(), 0);
        assert_eq!(density(&net, true).unwrap(), 0.0);
    }

    #[test]
    fn all_p_zero_fully_connected() {
        let w = DMatrix::from_fn(3, 3, |i, j| if i != j { 0.5 } else { 0.0 });
        let net = SpilloverNetwork::build_network(
            vec!["A".into(), "B".into(), "C".into()],
            w,
            DMatrix::zeros(3, 3),
            0.10,
        )
        .unwrap();
        assert_eq!(net.significant_edge_count(), 6);
    }

    #[test]
    fn density_constant_weights() {
        let w = DMatrix::from_fn(3, 3, |i, j| if i != j { 0.5 } else { 0.0 });
        let net = test_network(&["A", "B", "C"], w);
        assert_eq!(density(&net, false).unwrap(), 0.5);
    }

    #[test]
    fn density_empty_network_zero() {
        let net = test_network(&["A", "B"], DMatrix::zeros(2, 2));
        assert_eq!(density(&net, false).unwrap(), 0.0);
    }

    #[test]
    fn density_matches_naive_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 6;
        let w = DMatrix::from_fn(n, n, |i, j| if i != j { rng.random::<f64>() } else { 0.0 });
        let labels: Vec<&str> = vec!["A", "B", "C", "D", "E", "F"];
        let net = test_network(&labels, w.clone());
        let mut naive = 0.0;
        for i in 0..n {
            for j in 0..n {
                naive += w[(i, j)];
            }
        }
        naive /= (n * (n - 1)) as f64;
        assert!((density(&net, false).unwrap() - naive).abs() < 1e-15);
    }

    #[test]
    fn star_degrees() {
        let net = star(5, 0.2);
        let d = weighted_degrees(&net, false);
        assert!((d.out_degree[0] - 0.8).abs() < 1e-15);
        for leaf in 1..5 {
            assert!((d.in_degree[leaf] - 0.2).abs() < 1e-15);
            assert_eq!(d.out_degree[leaf], 0.0);
        }
    }

    #[test]
    fn degree_totals_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 7;
        let w = DMatrix::from_fn(n, n, |i, j| if i != j { rng.random::<f64>() } else { 0.0 });
        let labels: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
        let net = SpilloverNetwork::build_network(labels, w.clone(), DMatrix::zeros(n, n), 0.1)
            .unwrap();
        let d = weighted_degrees(&net, false);
        let total: f64 = w.iter().sum();
        assert!((d.in_degree.iter().sum::<f64>() - total).abs() < 1e-12);
        assert!((d.out_degree.iter().sum::<f64>() - total).abs() < 1e-12);
        // transpose-sum oracle
        for i in 0..n {
            let in_oracle: f64 = (0..n).map(|j| w[(j, i)]).sum();
            assert!((d.in_degree[i] - in_oracle).abs() < 1e-15);
        }
    }

    #[test]
    fn jaccard_identical_and_disjoint() {
        let w1 = DMatrix::from_fn(3, 3, |i, j| if i == 0 && j != 0 { 0.5 } else { 0.0 });
        let w2 = DMatrix::from_fn(3, 3, |i, j| if i == 1 && j != 1 { 0.5 } else { 0.0 });
        let a = test_network(&["A", "B", "C"], w1.clone());
        let a2 = test_network(&["A", "B", "C"], w1);
        let b = test_network(&["A", "B", "C"], w2);
        assert_eq!(jaccard(&a, &a2, false).unwrap(), 1.0);
        assert_eq!(jaccard(&a, &b, false).unwrap(), 0.0);
    }

    #[test]
    fn jaccard_hand_counted() {
        // A = {e1, e2, e3}, B = {e2, e3, e4} -> 2/4
        let mut wa = DMatrix::zeros(3, 3);
        wa[(0, 1)] = 0.1; // e1
        wa[(0, 2)] = 0.1; // e2
        wa[(1, 2)] = 0.1; // e3
        let mut wb = DMatrix::zeros(3, 3);
        wb[(0, 2)] = 0.1; // e2
        wb[(1, 2)] = 0.1; // e3
        wb[(2, 0)] = 0.1; // e4
        let a = test_network(&["A", "B", "C"], wa);
        let b = test_network(&["A", "B", "C"], wb);
        assert_eq!(jaccard(&a, &b, false).unwrap(), 0.5);
        assert_eq!(jaccard(&b, &a, false).unwrap(), 0.5);
    }

    #[test]
    fn jaccard_empty_sets_convention() {
        let a = test_network(&["A", "B"], DMatrix::zeros(2, 2));
        let b = test_network(&["A", "B"], DMatrix::zeros(2, 2));
        assert_eq!(jaccard(&a, &b, false).unwrap(), 1.0);
    }

    #[test]
    fn jaccard_label_mismatch() {
        let a = test_network(&["A", "B"], DMatrix::zeros(2, 2));
        let b = test_network(&["A", "C"], DMatrix::zeros(2, 2));
        assert!(jaccard(&a, &b, false).is_err());
    }

    #[test]
    fn star_broadcaster_tops_out_degree_and_pagerank() {
        let net = star(6, 0.2);
        let report = top_influencers(&net, 3, false).unwrap();
        assert_eq!(report.out_degree[0].label, "V00");
        assert_eq!(report.pagerank[0].label, "V00");
    }

    #[test]
    fn star_collector_tops_in_degree() {
        // everyone sends to vertex 0
        let n = 5;
        let weights = DMatrix::from_fn(n, n, |i, j| if j == 0 && i != 0 { 0.3 } else { 0.0 });
        let labels: Vec<String> = (0..n).map(|i| format!("V{i:02}")).collect();
        let net = SpilloverNetwork::build_network(labels, weights, DMatrix::zeros(n, n), 0.10)
            .unwrap();
        let report = top_influencers(&net, 2, false).unwrap();
        assert_eq!(report.in_degree[0].label, "V00");
    }

    #[test]
    fn rankings_match_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 8;
        let w = DMatrix::from_fn(n, n, |i, j| if i != j { rng.random::<f64>() } else { 0.0 });
        let labels: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
        let net = SpilloverNetwork::build_network(labels, w, DMatrix::zeros(n, n), 0.1).unwrap();
        let report = top_influencers(&net, n, false).unwrap();
        let degrees = weighted_degrees(&net, false);
        let mut sorted = degrees.out_degree.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let reported: Vec<f64> = report.out_degree.iter().map(|r| r.score).collect();
        assert_eq!(reported, sorted);
    }
}
