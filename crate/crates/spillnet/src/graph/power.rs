//! Summation of adjacency-matrix powers.
//!
//! `sum_{w>=1} W^w` converges exactly when the spectral radius of W is below
//! 1, in which case it equals `(I - W)^{-1} W`. The spectral radius is
//! estimated by power iteration (weights are nonnegative, so the dominant
//! eigenvalue is real and reachable from a positive start vector).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::SpilloverNetwork;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSumParams {
    /// Convergence threshold for the spectral-radius estimate.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerSumParams {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 1_000_000,
        }
    }
}

/// Outcome of the power-sum computation.
#[derive(Debug, Clone, PartialEq)]
pub enum PowerSum {
    /// Spectral radius below 1; `sum` is the closed-form series total.
    Converged {
        sum: DMatrix<f64>,
        spectral_radius: f64,
    },
    /// Spectral radius at or above 1; the series diverges.
    Diverged { spectral_radius: f64 },
}

/// Power sum over the requested network view.
pub fn power_sum(net: &SpilloverNetwork, filtered: bool, params: &PowerSumParams) -> Result<PowerSum> {
    power_sum_weights(&net.view(filtered), params)
}

/// Power sum on a bare nonnegative weight matrix.
pub fn power_sum_weights(w: &DMatrix<f64>, params: &PowerSumParams) -> Result<PowerSum> {
    let n = w.nrows();
    if n == 0 || w.ncols() != n {
        return Err(Error::DimensionMismatch {
            detail: format!("power sum needs a square matrix, got {}x{}", n, w.ncols()),
        });
    }
    let rho = spectral_radius(w, params)?;
    if rho >= 1.0 {
        return Ok(PowerSum::Diverged {
            spectral_radius: rho,
        });
    }
    let identity = DMatrix::identity(n, n);
    let lu = (&identity - w).lu();
    match lu.solve(w) {
        Some(sum) => Ok(PowerSum::Converged {
            sum,
            spectral_radius: rho,
        }),
        None => Err(Error::Conditioning {
            what: "power sum",
            detail: format!("(I - W) is numerically singular although rho = {rho} < 1"),
        }),
    }
}

/// Spectral radius of a nonnegative matrix by power iteration.
///
/// A strictly nilpotent matrix annihilates the positive start vector within
/// n steps and is detected exactly. Otherwise the iteration runs on W + I
/// (shifting away periodicity) and reports the growth ratio minus one.
fn spectral_radius(w: &DMatrix<f64>, params: &PowerSumParams) -> Result<f64> {
    let n = w.nrows();
    let mut v = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..n {
        v = w * &v;
        let norm = v.iter().map(|x: &f64| x.abs()).sum::<f64>();
        if norm == 0.0 {
            return Ok(0.0); // nilpotent
        }
        v /= norm;
    }

    let shifted = w + DMatrix::identity(n, n);
    let mut v = DVector::from_element(n, 1.0 / n as f64);
    let mut estimate = f64::NAN;
    for iter in 0..params.max_iter {
        let u = &shifted * &v;
        let norm = u.iter().map(|x: &f64| x.abs()).sum::<f64>();
        let next = norm; // ||v|| is 1 after normalization
        v = u / norm;
        if iter > 0 && (next - estimate).abs() < params.tol * next.max(1.0) {
            return Ok((next - 1.0).max(0.0));
        }
        estimate = next;
    }
    Err(Error::NonConvergence {
        what: "spectral radius",
        iterations: params.max_iter,
        residual: estimate,
        last_iterate: v.iter().copied().collect(),
    })
}
