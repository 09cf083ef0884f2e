//! Exponential-decay imputation of missing sentiment values.
//!
//! Each missing run after a present observation B is filled with
//! `B * exp(-lambda * t)` for t = 1..gap length, optionally plus Gaussian
//! noise whose scale comes from an AR(1) fit of the same column. The decay
//! clock resets at every present observation. Imputed values are clamped to
//! [-1, 1]; present values are never touched.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::panel::{fit_ar1_gappy, SentimentPanel};
use crate::rng::{stream, StreamDomain};

/// Noise policy for imputed values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoisePolicy {
    /// Pure decay, `eps_t = 0`.
    None,
    /// `eps_t ~ N(0, sigma^2)` with per-column sigma.
    #[default]
    Gaussian,
}

/// What to do with missing values before the first observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeadingFill {
    /// Reject the series.
    #[default]
    Error,
    /// Fill with 0 (neutral sentiment), no decay, no noise.
    Zero,
}

/// Per-series decay imputation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayConfig {
    /// Decay rate; the half-life calibrated default is 0.23.
    pub lambda: f64,
    pub noise: NoisePolicy,
    /// Noise standard deviation, used when `noise` is `Gaussian`.
    pub sigma: f64,
    pub leading_fill: LeadingFill,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            lambda: 0.23,
            noise: NoisePolicy::Gaussian,
            sigma: 0.0,
            leading_fill: LeadingFill::Error,
        }
    }
}

impl DecayConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                detail: format!("{} must be > 0", self.lambda),
            });
        }
        if self.sigma < 0.0 {
            return Err(Error::InvalidParameter {
                name: "sigma",
                detail: format!("{} must be >= 0", self.sigma),
            });
        }
        Ok(())
    }
}

/// Bookkeeping from one imputation pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct ImputeStats {
    pub imputed: usize,
    /// Imputed values that had to be clamped back into [-1, 1].
    pub clamped: usize,
}

/// Fill one series. `column` is used for error messages only.
pub fn impute_decay(
    series: &[Option<f64>],
    cfg: &DecayConfig,
    rng: &mut impl Rng,
    column: &str,
) -> Result<(Vec<f64>, ImputeStats)> {
    cfg.validate()?;
    let normal = match cfg.noise {
        NoisePolicy::Gaussian if cfg.sigma > 0.0 => {
            Some(Normal::new(0.0, cfg.sigma).map_err(|e| Error::InvalidParameter {
                name: "sigma",
                detail: e.to_string(),
            })?)
        }
        _ => None,
    };

    let mut stats = ImputeStats::default();
    let mut out = Vec::with_capacity(series.len());
    let mut last: Option<f64> = None;
    let mut gap = 0usize; // distance since the last present value

    for (t, v) in series.iter().enumerate() {
        match v {
            Some(v) => {
                out.push(*v);
                last = Some(*v);
                gap = 0;
            }
            None => {
                gap += 1;
                let filled = match last {
                    Some(base) => {
                        let mut x = base * (-cfg.lambda * gap as f64).exp();
                        if let Some(normal) = &normal {
                            x += normal.sample(rng);
                        }
                        x
                    }
                    None => match cfg.leading_fill {
                        LeadingFill::Zero => 0.0,
                        LeadingFill::Error => {
                            let run = series.iter().take_while(|v| v.is_none()).count();
                            let _ = t;
                            return Err(Error::LeadingMissing {
                                column: column.to_string(),
                                run,
                            });
                        }
                    },
                };
                let clamped = filled.clamp(-1.0, 1.0);
                if clamped != filled {
                    stats.clamped += 1;
                }
                stats.imputed += 1;
                out.push(clamped);
            }
        }
    }
    Ok((out, stats))
}

/// Panel-level imputation options. Per-column sigma is estimated from an
/// AR(1) fit on each column's consecutive present pairs when the policy is
/// Gaussian; RNG streams are keyed by (master seed, column index) so the
/// processing schedule cannot change the output.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PanelImputeConfig {
    pub lambda: f64,
    pub noise: NoisePolicy,
    pub leading_fill: LeadingFill,
    pub master_seed: u64,
}

impl Default for PanelImputeConfig {
    fn default() -> Self {
        Self {
            lambda: 0.23,
            noise: NoisePolicy::Gaussian,
            leading_fill: LeadingFill::Error,
            master_seed: 0,
        }
    }
}

/// Fill every column of a panel. Columns are processed in parallel; the
/// result is bit-identical for any worker count. A panel with no missing
/// values is returned unchanged.
pub fn impute_panel(
    panel: &SentimentPanel,
    cfg: &PanelImputeConfig,
) -> Result<(SentimentPanel, Vec<ImputeStats>)> {
    let columns: Vec<Result<(Vec<f64>, ImputeStats)>> = panel
        .values
        .par_iter()
        .enumerate()
        .map(|(c, col)| {
            let has_missing = col.iter().any(|v| v.is_none());
            if col.first().is_some_and(|v| v.is_none())
                && cfg.leading_fill == LeadingFill::Error
            {
                return Err(Error::LeadingMissing {
                    column: panel.tickers[c].clone(),
                    run: col.iter().take_while(|v| v.is_none()).count(),
                });
            }
            let sigma = match cfg.noise {
                NoisePolicy::Gaussian if has_missing => {
                    fit_ar1_gappy(col)
                        .map_err(|e| Error::Degenerate {
                            what: "imputation noise scale",
                            detail: format!("column {}: {e}", panel.tickers[c]),
                        })?
                        .sigma
                }
                _ => 0.0,
            };
            let decay = DecayConfig {
                lambda: cfg.lambda,
                noise: cfg.noise,
                sigma,
                leading_fill: cfg.leading_fill,
            };
            let mut rng = stream(cfg.master_seed, StreamDomain::Impute, c as u64, 0);
            impute_decay(col, &decay, &mut rng, &panel.tickers[c])
        })
        .collect();

    let mut values = Vec::with_capacity(columns.len());
    let mut stats = Vec::with_capacity(columns.len());
    for col in columns {
        let (filled, s) = col?;
        values.push(filled.into_iter().map(Some).collect());
        stats.push(s);
    }
    let out = SentimentPanel {
        dates: panel.dates.clone(),
        tickers: panel.tickers.clone(),
        values,
    };
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::parse_panel_csv;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn no_noise(lambda: f64) -> DecayConfig {
        DecayConfig {
            lambda,
            noise: NoisePolicy::None,
            sigma: 0.0,
            leading_fill: LeadingFill::Error,
        }
    }

    #[test]
    fn single_gap_decay_value() {
        let s = vec![Some(0.5), None, Some(0.2)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (out, stats) = impute_decay(&s, &no_noise(0.23), &mut rng, "A").unwrap();
        assert_eq!(out[1], 0.5 * (-0.23f64).exp());
        assert_eq!(out[0], 0.5);
        assert_eq!(out[2], 0.2);
        assert_eq!(stats.imputed, 1);
    }

    #[test]
    fn zero_base_stays_zero() {
        let s = vec![Some(0.0), None, None, None];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (out, _) = impute_decay(&s, &no_noise(1.7), &mut rng, "A").unwrap();
        assert_eq!(out, vec![0.0; 4]);
    }

    #[test]
    fn gap_of_three_decays_monotonically() {
        let s = vec![Some(0.8), None, None, None];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (out, _) = impute_decay(&s, &no_noise(0.23), &mut rng, "A").unwrap();
        for t in 1..=3 {
            assert_eq!(out[t], 0.8 * (-0.23 * t as f64).exp());
        }
        assert!(out[1] > out[2] && out[2] > out[3]);
        assert!(out.iter().all(|v| v.abs() <= 0.8));
    }

    #[test]
    fn decay_clock_resets_per_gap() {
        let s = vec![Some(0.8), None, Some(0.4), None];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (out, _) = impute_decay(&s, &no_noise(0.23), &mut rng, "A").unwrap();
        assert_eq!(out[1], 0.8 * (-0.23f64).exp());
        assert_eq!(out[3], 0.4 * (-0.23f64).exp());
    }

    #[test]
    fn leading_missing_errors_by_default() {
        let s = vec![None, None, Some(0.5)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = impute_decay(&s, &no_noise(0.23), &mut rng, "MCO").unwrap_err();
        match err {
            Error::LeadingMissing { column, run } => {
                assert_eq!(column, "MCO");
                assert_eq!(run, 2);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn leading_fill_zero_policy() {
        let s = vec![None, None, Some(0.5)];
        let cfg = DecayConfig {
            leading_fill: LeadingFill::Zero,
            ..no_noise(0.23)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (out, _) = impute_decay(&s, &cfg, &mut rng, "A").unwrap();
        assert_eq!(out, vec![0.0, 0.0, 0.5]);
    }

    #[test]
    fn noisy_outputs_stay_in_range() {
        let s: Vec<Option<f64>> = std::iter::once(Some(0.99))
            .chain(std::iter::repeat(None).take(500))
            .collect();
        let cfg = DecayConfig {
            lambda: 0.23,
            noise: NoisePolicy::Gaussian,
            sigma: 0.8,
            leading_fill: LeadingFill::Error,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (out, stats) = impute_decay(&s, &cfg, &mut rng, "A").unwrap();
        assert!(out.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert!(stats.clamped > 0, "sigma 0.8 should clamp at least once");
    }

    #[test]
    fn complete_panel_returned_unchanged() {
        let p = parse_panel_csv("date,A,B\n2020-01-01,0.1,0.2\n2020-01-02,0.3,0.4\n").unwrap();
        let cfg = PanelImputeConfig {
            master_seed: 7,
            ..PanelImputeConfig::default()
        };
        let (out, stats) = impute_panel(&p, &cfg).unwrap();
        assert_eq!(out, p);
        assert!(stats.iter().all(|s| s.imputed == 0));
    }

    #[test]
    fn panel_imputation_deterministic() {
        let mut csv = String::from("date,A,B\n");
        let base = chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..60i64 {
            let d = base + chrono::Days::new(i as u64);
            let a = if rng.random::<f64>() < 0.3 && i > 0 {
                String::new()
            } else {
                format!("{:.3}", rng.random::<f64>() * 0.8 - 0.4)
            };
            let b = format!("{:.3}", rng.random::<f64>() * 0.8 - 0.4);
            csv.push_str(&format!("{d},{a},{b}\n"));
        }
        let p = parse_panel_csv(&csv).unwrap();
        let cfg = PanelImputeConfig {
            master_seed: 42,
            ..PanelImputeConfig::default()
        };
        let (out1, _) = impute_panel(&p, &cfg).unwrap();
        let (out2, _) = impute_panel(&p, &cfg).unwrap();
        assert_eq!(out1, out2);
        assert!(out1.is_complete());
    }
}
