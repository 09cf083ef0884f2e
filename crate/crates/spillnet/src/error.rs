//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while loading data, estimating, or
/// assembling networks.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input file: bad date, duplicate ticker, out-of-range value, ...
    /// Carries enough location detail to point at the offending cell.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// I/O failure while reading or writing an artifact.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Not enough observations to run the requested estimator.
    #[error("insufficient data for {what}: need {needed}, have {have}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        have: usize,
    },

    /// Input has no usable variation (constant series, zero-variance regressor).
    #[error("degenerate input for {what}: {detail}")]
    Degenerate { what: &'static str, detail: String },

    /// Two inputs that must agree in shape do not.
    #[error("dimension mismatch: {detail}")]
    DimensionMismatch { detail: String },

    /// Operation over two networks with different vertex sets.
    #[error("label mismatch: {detail}")]
    LabelMismatch { detail: String },

    /// Invalid parameter value (negative rate, alpha outside (0,1), ...).
    #[error("invalid parameter {name}: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    /// Series starts with missing values and no leading-fill policy is set.
    #[error("column {column} starts with {run} missing value(s) and no leading-fill policy is set")]
    LeadingMissing { column: String, run: usize },

    /// Iterative solver did not reach tolerance; carries the last iterate.
    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    /// Linear solve failed although the spectral test said it should succeed.
    #[error("ill-conditioned system in {what}: {detail}")]
    Conditioning { what: &'static str, detail: String },

    /// Arborescence cannot span the graph from the chosen root.
    #[error("vertices unreachable from root {root}: {unreachable:?}")]
    PartialCoverage {
        root: String,
        unreachable: Vec<String>,
    },
}

impl Error {
    /// True for errors caused by bad input data (as opposed to numerical
    /// failures). The CLI maps these to distinct exit codes.
    pub fn is_data_error(&self) -> bool {
        !matches!(
            self,
            Error::NonConvergence { .. } | Error::Conditioning { .. }
        )
    }
}
