//! Synthetic sentiment panels for tests, benchmarks, and demos.
//!
//! Real panels come from proprietary terminals, so everything runnable in
//! this repository is exercised against generated data: autocorrelated
//! in-range columns with a controllable missingness gradient, and a
//! planted-hub variant with known directed structure.

use chrono::{Days, NaiveDate};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::panel::SentimentPanel;
use crate::rng::{stream, StreamDomain};

fn start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2019, 9, 30).unwrap()
}

fn dates(rows: usize) -> Vec<NaiveDate> {
    (0..rows)
        .map(|i| start_date() + Days::new(i as u64))
        .collect()
}

/// Shape of a generic random panel.
#[derive(Debug, Clone, Copy)]
pub struct RandomPanelSpec {
    pub rows: usize,
    pub cols: usize,
    /// Missing fraction of the first column.
    pub missing_low: f64,
    /// Missing fraction of the last column; intermediate columns interpolate.
    pub missing_high: f64,
    pub seed: u64,
}

/// Panel of independent AR(1)-style sentiment columns in [-1, 1], with a
/// per-column missingness gradient. The first observation of every column is
/// always present so default decay imputation applies.
pub fn random_panel(spec: &RandomPanelSpec) -> SentimentPanel {
    let tickers: Vec<String> = (0..spec.cols).map(|c| format!("T{c:02}")).collect();
    let noise = Normal::new(0.0, 0.18).unwrap();
    let values = (0..spec.cols)
        .map(|c| {
            let mut rng = stream(spec.seed, StreamDomain::Pair, 0xD40A, c as u64);
            let frac = if spec.cols > 1 {
                spec.missing_low
                    + (spec.missing_high - spec.missing_low) * c as f64
                        / (spec.cols - 1) as f64
            } else {
                spec.missing_low
            };
            let mut x = 0.0f64;
            (0..spec.rows)
                .map(|t| {
                    x = (0.3 * x + noise.sample(&mut rng)).clamp(-1.0, 1.0);
                    if t > 0 && rng.random::<f64>() < frac {
                        None
                    } else {
                        Some(x)
                    }
                })
                .collect()
        })
        .collect();
    SentimentPanel {
        dates: dates(spec.rows),
        tickers,
        values,
    }
}

/// Shape of a planted-hub panel.
#[derive(Debug, Clone, Copy)]
pub struct HubPanelSpec {
    pub rows: usize,
    /// Columns driven by the hub with one day's lag.
    pub n_driven: usize,
    /// Independent noise columns.
    pub n_noise: usize,
    /// Coefficient on the lagged hub value in each driven column.
    pub coupling: f64,
    /// Own-noise scale of the driven columns.
    pub noise_sd: f64,
    pub seed: u64,
}

/// Complete panel whose first column ("HUB") drives the next `n_driven`
/// columns: `driven[t] = coupling * hub[t-1] + eps`. Remaining columns are
/// independent noise. Ground truth for direction-detection and
/// planted-structure checks.
pub fn hub_panel(spec: &HubPanelSpec) -> SentimentPanel {
    let mut tickers = vec!["HUB".to_string()];
    tickers.extend((1..=spec.n_driven).map(|d| format!("D{d:02}")));
    tickers.extend((1..=spec.n_noise).map(|m| format!("N{m:02}")));

    let mut rng = stream(spec.seed, StreamDomain::Pair, 0x4B, 0);
    let hub_noise: Normal<f64> = Normal::new(0.0, 0.25).unwrap();
    let hub: Vec<f64> = (0..spec.rows)
        .map(|_| hub_noise.sample(&mut rng).clamp(-1.0, 1.0))
        .collect();

    let mut values: Vec<Vec<Option<f64>>> = Vec::with_capacity(tickers.len());
    values.push(hub.iter().map(|&v| Some(v)).collect());

    let own = Normal::new(0.0, spec.noise_sd).unwrap();
    for d in 0..spec.n_driven {
        let mut rng = stream(spec.seed, StreamDomain::Pair, 0x4B, 1 + d as u64);
        let col: Vec<Option<f64>> = (0..spec.rows)
            .map(|t| {
                let lagged = if t == 0 { 0.0 } else { hub[t - 1] };
                Some((spec.coupling * lagged + own.sample(&mut rng)).clamp(-1.0, 1.0))
            })
            .collect();
        values.push(col);
    }
    for m in 0..spec.n_noise {
        let mut rng = stream(spec.seed, StreamDomain::Pair, 0x4C, m as u64);
        values.push(
            (0..spec.rows)
                .map(|_| Some(hub_noise.sample(&mut rng).clamp(-1.0, 1.0)))
                .collect(),
        );
    }

    SentimentPanel {
        dates: dates(spec.rows),
        tickers,
        values,
    }
}
