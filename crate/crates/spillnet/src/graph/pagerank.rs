//! Weighted PageRank by power iteration.
//!
//! ```text
//! PR(v_i) = (1 - f) / n + f * sum_j (w_ji / out_j) PR(v_j)
//! ```
//!
//! Vertices with zero weighted out-degree (possible after significance
//! filtering) redistribute their mass uniformly, which keeps the scores a
//! probability distribution.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::SpilloverNetwork;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankParams {
    pub damping: f64,
    /// L1 change threshold between iterations.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

/// PageRank over the requested network view.
pub fn pagerank(net: &SpilloverNetwork, filtered: bool, params: &PageRankParams) -> Result<Vec<f64>> {
    pagerank_weights(&net.view(filtered), params)
}

/// PageRank on a bare weight matrix (`w[(j, i)]` feeds vertex i from j).
pub fn pagerank_weights(w: &DMatrix<f64>, params: &PageRankParams) -> Result<Vec<f64>> {
    let n = w.nrows();
    if n == 0 || w.ncols() != n {
        return Err(Error::DimensionMismatch {
            detail: format!("pagerank needs a nonempty square matrix, got {}x{}", n, w.ncols()),
        });
    }
    if !(0.0..1.0).contains(&params.damping) {
        return Err(Error::InvalidParameter {
            name: "damping",
            detail: format!("{} outside [0, 1)", params.damping),
        });
    }
    let f = params.damping;
    let nf = n as f64;
    let out: Vec<f64> = (0..n).map(|j| w.row(j).iter().sum()).collect();

    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut last_diff = f64::INFINITY;
    for _ in 0..params.max_iter {
        let dangling: f64 = (0..n).filter(|&j| out[j] == 0.0).map(|j| x[j]).sum();
        let base = (1.0 - f) / nf + f * dangling / nf;
        for v in next.iter_mut() {
            *v = base;
        }
        for j in 0..n {
            if out[j] > 0.0 {
                let share = f * x[j] / out[j];
                for (i, item) in next.iter_mut().enumerate() {
                    *item += share * w[(j, i)];
                }
            }
        }
        let diff: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if diff < params.tol {
            return Ok(x);
        }
        last_diff = diff;
    }
    Err(Error::NonConvergence {
        what: "pagerank",
        iterations: params.max_iter,
        residual: last_diff,
        last_iterate: x,
    })
}
