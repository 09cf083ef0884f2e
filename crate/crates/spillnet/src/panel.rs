//! Dated sentiment panels: CSV ingestion, descriptive statistics, AR(1) fits.
//!
//! A panel is a T×n matrix of optional scores in [-1, 1], one column per
//! ticker, indexed by strictly increasing calendar dates. Missing cells stay
//! explicit until the imputation stage fills them.

use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Aligned multivariate sentiment series with explicit missing markers.
#[derive(Debug, Clone, PartialEq)]
pub struct SentimentPanel {
    /// Strictly increasing observation dates.
    pub dates: Vec<NaiveDate>,
    /// Unique, nonempty vertex labels, one per column.
    pub tickers: Vec<String>,
    /// Column-major values: `values[c][t]` is ticker `c` on date `t`.
    /// `None` marks a missing observation; present values lie in [-1, 1].
    pub values: Vec<Vec<Option<f64>>>,
}

impl SentimentPanel {
    /// Assemble a panel from parts, enforcing the shape and range invariants.
    pub fn new(
        dates: Vec<NaiveDate>,
        tickers: Vec<String>,
        values: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Parse {
                    location: format!("date {}", w[1]),
                    message: "dates must be strictly increasing without duplicates".into(),
                });
            }
        }
        for (i, t) in tickers.iter().enumerate() {
            if t.is_empty() {
                return Err(Error::Parse {
                    location: format!("header column {}", i + 2),
                    message: "empty ticker".into(),
                });
            }
            if tickers[..i].contains(t) {
                return Err(Error::Parse {
                    location: format!("header column {}", i + 2),
                    message: format!("duplicate ticker {t}"),
                });
            }
        }
        if values.len() != tickers.len() {
            return Err(Error::DimensionMismatch {
                detail: format!("{} columns for {} tickers", values.len(), tickers.len()),
            });
        }
        for (c, col) in values.iter().enumerate() {
            if col.len() != dates.len() {
                return Err(Error::DimensionMismatch {
                    detail: format!(
                        "column {} has {} rows, expected {}",
                        tickers[c],
                        col.len(),
                        dates.len()
                    ),
                });
            }
            for (t, v) in col.iter().enumerate() {
                if let Some(v) = v {
                    if !v.is_finite() || *v < -1.0 || *v > 1.0 {
                        return Err(Error::Parse {
                            location: format!("row {} column {}", t + 2, tickers[c]),
                            message: format!("value {v} outside [-1, 1]"),
                        });
                    }
                }
            }
        }
        Ok(Self {
            dates,
            tickers,
            values,
        })
    }

    /// Number of observation dates.
    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    /// Number of tickers.
    pub fn n_cols(&self) -> usize {
        self.tickers.len()
    }

    /// Column by ticker label.
    pub fn column(&self, ticker: &str) -> Option<&[Option<f64>]> {
        self.tickers
            .iter()
            .position(|t| t == ticker)
            .map(|c| self.values[c].as_slice())
    }

    /// True when no cell is missing.
    pub fn is_complete(&self) -> bool {
        self.values
            .iter()
            .all(|col| col.iter().all(|v| v.is_some()))
    }

    /// Rows `[start, end)` as a new panel.
    pub fn slice_rows(&self, start: usize, end: usize) -> Self {
        Self {
            dates: self.dates[start..end].to_vec(),
            tickers: self.tickers.clone(),
            values: self
                .values
                .iter()
                .map(|col| col[start..end].to_vec())
                .collect(),
        }
    }

    /// Serialize to the interchange CSV: header `date,T1,...,Tn`, ISO dates,
    /// empty field for missing. Finite values print in shortest
    /// round-trippable form, so load → save → load is bit-exact.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str("date");
        for t in &self.tickers {
            out.push(',');
            out.push_str(t);
        }
        out.push('\n');
        for (r, date) in self.dates.iter().enumerate() {
            let _ = write!(out, "{}", date.format("%Y-%m-%d"));
            for col in &self.values {
                out.push(',');
                if let Some(v) = col[r] {
                    let _ = write!(out, "{v}");
                }
            }
            out.push('\n');
        }
        out
    }

    /// Write the interchange CSV to a file.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Parse the interchange CSV format. Rows are sorted by date after parsing;
/// duplicate dates, duplicate tickers, malformed dates, and out-of-range
/// values are rejected with the offending row/column named.
pub fn load_panel(path: impl AsRef<Path>) -> Result<SentimentPanel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_panel_csv(&text)
}

/// Parse panel CSV from an in-memory string (same rules as [`load_panel`]).
pub fn parse_panel_csv(text: &str) -> Result<SentimentPanel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            location: "header".into(),
            message: e.to_string(),
        })?
        .clone();
    if headers.is_empty() {
        return Err(Error::Parse {
            location: "header".into(),
            message: "empty header row".into(),
        });
    }
    let tickers: Vec<String> = headers.iter().skip(1).map(|s| s.to_string()).collect();
    if tickers.is_empty() {
        return Err(Error::Parse {
            location: "header".into(),
            message: "no ticker columns after the date column".into(),
        });
    }

    // (date, row values) pairs; sorted by date below.
    let mut rows: Vec<(NaiveDate, Vec<Option<f64>>)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // 1-based, after the header
        let record = record.map_err(|e| Error::Parse {
            location: format!("row {line}"),
            message: e.to_string(),
        })?;
        if record.len() != tickers.len() + 1 {
            return Err(Error::Parse {
                location: format!("row {line}"),
                message: format!(
                    "expected {} fields, found {}",
                    tickers.len() + 1,
                    record.len()
                ),
            });
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|_| Error::Parse {
            location: format!("row {line}"),
            message: format!("malformed date {:?}", &record[0]),
        })?;
        let mut row = Vec::with_capacity(tickers.len());
        for (c, field) in record.iter().skip(1).enumerate() {
            if field.is_empty() {
                row.push(None);
            } else {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    location: format!("row {line} column {}", tickers[c]),
                    message: format!("not a number: {field:?}"),
                })?;
                if !v.is_finite() || !(-1.0..=1.0).contains(&v) {
                    return Err(Error::Parse {
                        location: format!("row {line} column {}", tickers[c]),
                        message: format!("value {v} outside [-1, 1]"),
                    });
                }
                row.push(Some(v));
            }
        }
        rows.push((date, row));
    }

    rows.sort_by_key(|(d, _)| *d);
    for w in rows.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::Parse {
                location: format!("date {}", w[0].0),
                message: "duplicate date".into(),
            });
        }
    }

    let dates: Vec<NaiveDate> = rows.iter().map(|(d, _)| *d).collect();
    let mut values = vec![Vec::with_capacity(dates.len()); tickers.len()];
    for (_, row) in &rows {
        for (c, v) in row.iter().enumerate() {
            values[c].push(*v);
        }
    }
    SentimentPanel::new(dates, tickers, values)
}

/// Descriptive statistics of one panel column, computed over present values.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StatsSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub sd: f64,
    pub q25: f64,
    pub q75: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub n_missing: usize,
    pub missing_fraction: f64,
    /// Set when the series is constant; skewness/kurtosis are then reported
    /// as 0 by convention instead of NaN.
    pub degenerate: bool,
}

/// Linear interpolation quantile (type-7 convention) over a sorted slice.
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= sorted.len() {
        sorted[sorted.len() - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Summarize one column: moments over present values only, quantiles by
/// linear interpolation, kurtosis reported as excess kurtosis.
pub fn describe(series: &[Option<f64>]) -> Result<StatsSummary> {
    let total = series.len();
    let present: Vec<f64> = series.iter().filter_map(|v| *v).collect();
    let n = present.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "descriptive statistics",
            needed: 2,
            have: n,
        });
    }
    let n_missing = total - n;
    let nf = n as f64;

    let mean = present.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for v in &present {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let sd = (m2 * nf / (nf - 1.0)).sqrt();

    let degenerate = m2 == 0.0;
    let (skewness, kurtosis) = if degenerate {
        (0.0, 0.0)
    } else {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    };

    let mut sorted = present.clone();
    sorted.sort_by(f64::total_cmp);

    Ok(StatsSummary {
        min: sorted[0],
        max: sorted[n - 1],
        mean,
        sd,
        q25: quantile_sorted(&sorted, 0.25),
        q75: quantile_sorted(&sorted, 0.75),
        skewness,
        kurtosis,
        n_missing,
        missing_fraction: n_missing as f64 / total as f64,
        degenerate,
    })
}

/// First-order autoregression `x_t = o + psi1 x_{t-1} + eps_t` fitted by OLS.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Ar1Fit {
    pub intercept: f64,
    pub psi1: f64,
    /// Residual standard deviation (the noise scale used by imputation).
    pub sigma: f64,
    /// Number of consecutive (x_{t-1}, x_t) pairs used.
    pub n_used: usize,
}

const MIN_AR1_PAIRS: usize = 9; // a length-10 complete series

/// Fit AR(1) on a complete series of length >= 10.
pub fn fit_ar1(series: &[f64]) -> Result<Ar1Fit> {
    if series.len() < 10 {
        return Err(Error::InsufficientData {
            what: "AR(1) fit",
            needed: 10,
            have: series.len(),
        });
    }
    fit_ar1_from_pairs(series.windows(2).map(|w| (w[0], w[1])))
}

/// Fit AR(1) on the consecutive present pairs of a gappy series. Pairs where
/// either side is missing are skipped; the gap structure is otherwise ignored.
pub fn fit_ar1_gappy(series: &[Option<f64>]) -> Result<Ar1Fit> {
    fit_ar1_from_pairs(
        series
            .windows(2)
            .filter_map(|w| Some((w[0]?, w[1]?))),
    )
}

fn fit_ar1_from_pairs(pairs: impl Iterator<Item = (f64, f64)>) -> Result<Ar1Fit> {
    let pairs: Vec<(f64, f64)> = pairs.collect();
    let n = pairs.len();
    if n < MIN_AR1_PAIRS {
        return Err(Error::InsufficientData {
            what: "AR(1) fit (consecutive pairs)",
            needed: MIN_AR1_PAIRS,
            have: n,
        });
    }
    if pairs.iter().all(|(x, _)| *x == pairs[0].0) {
        return Err(Error::Degenerate {
            what: "AR(1) fit",
            detail: "lagged series has zero variance".into(),
        });
    }
    let nf = n as f64;
    let mean_x = pairs.iter().map(|(x, _)| x).sum::<f64>() / nf;
    let mean_y = pairs.iter().map(|(_, y)| y).sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in &pairs {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let psi1 = sxy / sxx;
    let intercept = mean_y - psi1 * mean_x;
    let ssr: f64 = pairs
        .iter()
        .map(|(x, y)| {
            let r = y - intercept - psi1 * x;
            r * r
        })
        .sum();
    let dof = (n as f64 - 2.0).max(1.0);
    Ok(Ar1Fit {
        intercept,
        psi1,
        sigma: (ssr / dof).sqrt(),
        n_used: n,
    })
}

/// Simulate `x_t = o + psi1 x_{t-1} + eps_t`, `eps_t ~ N(0, sigma^2)`,
/// starting from a draw of the stationary distribution. Requires |psi1| < 1.
pub fn simulate_ar1(
    intercept: f64,
    psi1: f64,
    sigma: f64,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if psi1.abs() >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "psi1",
            detail: format!("|{psi1}| >= 1 has no stationary distribution"),
        });
    }
    if sigma < 0.0 {
        return Err(Error::InvalidParameter {
            name: "sigma",
            detail: format!("{sigma} < 0"),
        });
    }
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter {
        name: "sigma",
        detail: e.to_string(),
    })?;
    let stat_mean = intercept / (1.0 - psi1);
    let stat_sd = sigma / (1.0 - psi1 * psi1).sqrt();
    let mut x = stat_mean
        + if stat_sd > 0.0 {
            Normal::new(0.0, stat_sd).unwrap().sample(rng)
        } else {
            0.0
        };
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(x);
        x = intercept + psi1 * x + noise.sample(rng);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn panel_from(text: &str) -> Result<SentimentPanel> {
        parse_panel_csv(text)
    }

    #[test]
    fn load_missing_cell() {
        let p = panel_from("date,A,B\n2020-01-01,0.1,\n2020-01-02,0.2,0.3\n2020-01-03,,0.4\n")
            .unwrap();
        assert_eq!(p.n_rows(), 3);
        assert_eq!(p.values[1][0], None);
        assert_eq!(p.values[0][2], None);
        assert_eq!(p.values[0][0], Some(0.1));
    }

    #[test]
    fn out_of_range_value_names_cell() {
        let err = panel_from("date,A\n2020-01-01,1.5\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2"), "{msg}");
        assert!(msg.contains("column A"), "{msg}");
    }

    #[test]
    fn duplicate_date_rejected() {
        let err = panel_from("date,A\n2020-01-01,0.1\n2020-01-01,0.2\n").unwrap_err();
        assert!(err.to_string().contains("duplicate date"));
    }

    #[test]
    fn duplicate_ticker_rejected() {
        let err = panel_from("date,A,A\n2020-01-01,0.1,0.2\n").unwrap_err();
        assert!(err.to_string().contains("duplicate ticker"));
    }

    #[test]
    fn malformed_date_rejected() {
        let err = panel_from("date,A\n01/02/2020,0.1\n").unwrap_err();
        assert!(err.to_string().contains("malformed date"));
    }

    #[test]
    fn rows_sorted_by_date() {
        let p = panel_from("date,A\n2020-01-03,0.3\n2020-01-01,0.1\n2020-01-02,0.2\n").unwrap();
        assert_eq!(p.values[0], vec![Some(0.1), Some(0.2), Some(0.3)]);
    }

    #[test]
    fn csv_round_trip_bit_exact() {
        let text = "date,A,B\n2020-01-01,0.1,\n2020-01-02,-0.25,0.333333333333333\n";
        let p = panel_from(text).unwrap();
        let p2 = panel_from(&p.to_csv_string()).unwrap();
        assert_eq!(p, p2);
    }

    #[test]
    fn describe_constant_series() {
        let s = vec![Some(0.0); 4];
        let d = describe(&s).unwrap();
        assert_eq!(d.mean, 0.0);
        assert_eq!(d.sd, 0.0);
        assert_eq!(d.skewness, 0.0);
        assert_eq!(d.kurtosis, 0.0);
        assert!(d.degenerate);
    }

    #[test]
    fn describe_symmetric_three_points() {
        let s = vec![Some(-1.0), Some(0.0), Some(1.0)];
        let d = describe(&s).unwrap();
        assert_eq!(d.mean, 0.0);
        assert_eq!(d.min, -1.0);
        assert_eq!(d.max, 1.0);
        assert!(!d.degenerate);
    }

    #[test]
    fn describe_all_missing_errors() {
        let s: Vec<Option<f64>> = vec![None, None, None];
        assert!(matches!(
            describe(&s),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn describe_counts_missing() {
        let s = vec![Some(0.1), None, Some(0.3), None];
        let d = describe(&s).unwrap();
        assert_eq!(d.n_missing, 2);
        assert_eq!(d.missing_fraction, 0.5);
    }

    // Oracle: skewness by the direct moment formula on the same sample.
    #[test]
    fn describe_skewness_matches_direct_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // Skewed mixture: 80% N(0, 0.05), 20% N(0.5, 0.1), clamped to range.
        let sample: Vec<f64> = (0..100_000)
            .map(|_| {
                let v: f64 = if rng.random::<f64>() < 0.8 {
                    Normal::new(0.0, 0.05).unwrap().sample(&mut rng)
                } else {
                    Normal::new(0.5, 0.1).unwrap().sample(&mut rng)
                };
                v.clamp(-1.0, 1.0)
            })
            .collect();
        let n = sample.len() as f64;
        let mean = sample.iter().sum::<f64>() / n;
        let m2 = sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let m3 = sample.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
        let oracle = m3 / m2.powf(1.5);

        let wrapped: Vec<Option<f64>> = sample.iter().copied().map(Some).collect();
        let d = describe(&wrapped).unwrap();
        assert!(
            (d.skewness - oracle).abs() <= 0.05 * oracle.abs(),
            "skewness {} vs oracle {}",
            d.skewness,
            oracle
        );
    }

    #[test]
    fn quantile_ordering() {
        let s: Vec<Option<f64>> = (0..10).map(|i| Some(i as f64 / 10.0)).collect();
        let d = describe(&s).unwrap();
        assert!(d.min <= d.q25 && d.q25 <= d.q75 && d.q75 <= d.max);
    }

    #[test]
    fn ar1_white_noise_sigma_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs = simulate_ar1(0.0, 0.0, 0.1, 100_000, &mut rng).unwrap();
        let fit = fit_ar1(&xs).unwrap();
        assert!(fit.psi1.abs() < 0.02, "psi1 {}", fit.psi1);
        assert!((fit.sigma - 0.1).abs() < 0.003, "sigma {}", fit.sigma);
    }

    #[test]
    fn ar1_parameters_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let xs = simulate_ar1(0.0, 0.5, 0.1, 100_000, &mut rng).unwrap();
        let fit = fit_ar1(&xs).unwrap();
        assert!((fit.psi1 - 0.5).abs() < 0.02, "psi1 {}", fit.psi1);
        assert!((fit.sigma - 0.1).abs() < 0.003, "sigma {}", fit.sigma);
        assert!(fit.intercept.abs() < 0.01, "o {}", fit.intercept);
    }

    #[test]
    fn ar1_error_shrinks_with_n() {
        let mut errs = Vec::new();
        for (i, n) in [1_000usize, 10_000, 100_000].into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
            let xs = simulate_ar1(0.05, 0.4, 0.2, n, &mut rng).unwrap();
            let fit = fit_ar1(&xs).unwrap();
            errs.push((fit.psi1 - 0.4).abs() + (fit.sigma - 0.2).abs());
        }
        assert!(errs[2] < errs[0], "errors {errs:?} should shrink");
    }

    #[test]
    fn ar1_variance_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let xs = simulate_ar1(0.0, 0.6, 0.1, 100_000, &mut rng).unwrap();
        let fit = fit_ar1(&xs).unwrap();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let implied = fit.sigma * fit.sigma / (1.0 - fit.psi1 * fit.psi1);
        assert!(
            (var - implied).abs() / var < 0.05,
            "sample var {var} vs implied {implied}"
        );
    }

    #[test]
    fn ar1_constant_series_degenerate() {
        let xs = vec![0.3; 50];
        assert!(matches!(fit_ar1(&xs), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn ar1_short_series_errors() {
        let xs = vec![0.0, 0.1, 0.2];
        assert!(matches!(
            fit_ar1(&xs),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn ar1_gappy_uses_consecutive_pairs() {
        // 0.0, 0.1 missing everywhere between pairs: only 2 usable pairs -> error.
        let s = vec![
            Some(0.0),
            Some(0.1),
            None,
            Some(0.2),
            Some(0.3),
            None,
            Some(0.1),
        ];
        assert!(matches!(
            fit_ar1_gappy(&s),
            Err(Error::InsufficientData { .. })
        ));
    }
}
