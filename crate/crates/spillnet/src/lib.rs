//! Transfer-entropy spillover networks over sentiment panels.
//!
//! The pipeline, end to end:
//!
//! 1. [`panel`] loads a dated panel of per-ticker sentiment scores in
//!    [-1, 1] with explicit missing values, and fits the AR(1) noise scale.
//! 2. [`impute`] fills gaps by exponential decay from the last observation,
//!    optionally with AR(1)-calibrated Gaussian noise.
//! 3. [`encode`] discretizes each series onto equiprobable quantile states.
//! 4. [`info`] estimates entropy, conditional entropy, and normalized
//!    transfer entropy between symbol series, and calibrates the history
//!    length on simulated autoregressions.
//! 5. [`bootstrap`] scores each ordered pair's transfer entropy against a
//!    Markov-resampled null to get a p-value.
//! 6. [`graph`] assembles significance-masked spillover networks and
//!    computes density, weighted degrees, PageRank, maximum spanning
//!    arborescences, Jaccard similarity, and power-matrix sums.
//! 7. [`pipeline`] orchestrates rolling windows and regime aggregation with
//!    deterministic parallel execution.
//! 8. [`export`] writes the JSON/CSV/DOT artifact tree.
//!
//! Determinism contract: every randomized stage draws from a stream keyed by
//! (master seed, stage, work-unit coordinates), so outputs are byte-identical
//! across thread counts and runs.

pub mod bootstrap;
pub mod encode;
pub mod error;
pub mod export;
pub mod graph;
pub mod impute;
pub mod info;
pub mod panel;
pub mod pipeline;
pub mod rng;
pub mod synthetic;

pub use error::{Error, Result};
