//! Quantile discretization of continuous series into a small state alphabet.
//!
//! Thresholds sit at cumulative probabilities i/S so the S states are as
//! equiprobable as ties permit. State assignment closes the lowest and
//! highest bins: a value equal to the first threshold maps to state 1, a
//! value equal to the last threshold maps to state S.

use crate::error::{Error, Result};
use crate::panel::quantile_sorted;

/// Quantile thresholds for an S-state encoding.
///
/// `levels` holds the distinct threshold values in ascending order. With
/// heavy ties, adjacent quantiles can coincide; duplicates are then merged
/// (`collapsed` is set) and the encoding simply stops emitting the states in
/// between. The declared alphabet size never shrinks, so encodings from
/// different series stay comparable.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    pub levels: Vec<f64>,
    pub n_states: usize,
    pub collapsed: bool,
}

/// A series mapped to symbols 1..=alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSeries {
    pub symbols: Vec<u8>,
    pub alphabet: u8,
    /// Thresholds that produced the encoding; empty for hand-built series.
    pub thresholds: Vec<f64>,
}

impl SymbolSeries {
    /// Wrap raw symbols, checking they fit the alphabet.
    pub fn from_symbols(symbols: Vec<u8>, alphabet: u8) -> Result<Self> {
        if alphabet < 2 {
            return Err(Error::InvalidParameter {
                name: "alphabet",
                detail: format!("{alphabet} < 2"),
            });
        }
        if let Some(bad) = symbols.iter().find(|&&s| s < 1 || s > alphabet) {
            return Err(Error::InvalidParameter {
                name: "symbols",
                detail: format!("symbol {bad} outside 1..={alphabet}"),
            });
        }
        Ok(Self {
            symbols,
            alphabet,
            thresholds: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Empirical quantile thresholds at cumulative probabilities i/n_states.
pub fn quantile_thresholds(series: &[f64], n_states: usize) -> Result<Thresholds> {
    if n_states < 2 {
        return Err(Error::InvalidParameter {
            name: "n_states",
            detail: format!("{n_states} < 2"),
        });
    }
    if n_states > u8::MAX as usize {
        return Err(Error::InvalidParameter {
            name: "n_states",
            detail: format!("{n_states} exceeds the supported alphabet"),
        });
    }
    if series.len() < n_states {
        return Err(Error::InsufficientData {
            what: "quantile thresholds",
            needed: n_states,
            have: series.len(),
        });
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::Degenerate {
            what: "quantile thresholds",
            detail: "constant series".into(),
        });
    }
    let mut levels: Vec<f64> = (1..n_states)
        .map(|i| quantile_sorted(&sorted, i as f64 / n_states as f64))
        .collect();
    let before = levels.len();
    levels.dedup();
    let collapsed = levels.len() != before;
    Ok(Thresholds {
        levels,
        n_states,
        collapsed,
    })
}

/// Map one value to its state.
fn state_of(v: f64, th: &Thresholds) -> u8 {
    let first = th.levels[0];
    let last = *th.levels.last().unwrap();
    if v <= first {
        1
    } else if v >= last {
        th.n_states as u8
    } else {
        // strictly between the outer thresholds; interior ties fall low
        let mut state = 1u8;
        for q in &th.levels {
            if v > *q {
                state += 1;
            } else {
                break;
            }
        }
        state
    }
}

/// Encode a series against precomputed thresholds. Total for any finite
/// inputs given valid thresholds.
pub fn encode(series: &[f64], thresholds: &Thresholds) -> SymbolSeries {
    let symbols = series.iter().map(|&v| state_of(v, thresholds)).collect();
    SymbolSeries {
        symbols,
        alphabet: thresholds.n_states as u8,
        thresholds: thresholds.levels.clone(),
    }
}

/// Convenience: thresholds plus encoding in one call.
pub fn encode_quantile(series: &[f64], n_states: usize) -> Result<SymbolSeries> {
    let th = quantile_thresholds(series, n_states)?;
    Ok(encode(series, &th))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tertiles_of_one_to_nine() {
        let series: Vec<f64> = (1..=9).map(|v| v as f64).collect();
        let sym = encode_quantile(&series, 3).unwrap();
        assert_eq!(sym.symbols, vec![1, 1, 1, 2, 2, 2, 3, 3, 3]);
    }

    #[test]
    fn distinct_values_get_equal_state_counts() {
        for m in [2usize, 5, 17] {
            let series: Vec<f64> = (0..3 * m).map(|v| (v as f64).sin() + v as f64).collect();
            let sym = encode_quantile(&series, 3).unwrap();
            for state in 1..=3u8 {
                let count = sym.symbols.iter().filter(|&&s| s == state).count();
                assert_eq!(count, m, "state {state} with m={m}");
            }
        }
    }

    #[test]
    fn heavy_ties_collapse_with_warning() {
        let series = vec![0.0, 0.0, 0.0, 0.0, 1.0];
        let th = quantile_thresholds(&series, 3).unwrap();
        assert!(th.collapsed);
        assert_eq!(th.levels, vec![0.0]);
        let sym = encode(&series, &th);
        assert_eq!(sym.symbols, vec![1, 1, 1, 1, 3]);
        assert_eq!(sym.alphabet, 3);
    }

    #[test]
    fn constant_series_rejected() {
        assert!(matches!(
            quantile_thresholds(&[0.5; 10], 3),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn boundary_values_close_outer_bins() {
        let th = Thresholds {
            levels: vec![-0.5, 0.5],
            n_states: 3,
            collapsed: false,
        };
        let sym = encode(&[-0.5, 0.0, 0.5], &th);
        assert_eq!(sym.symbols, vec![1, 2, 3]);
    }

    #[test]
    fn all_below_first_threshold() {
        let th = Thresholds {
            levels: vec![10.0, 20.0],
            n_states: 3,
            collapsed: false,
        };
        let sym = encode(&[1.0, 2.0, 3.0], &th);
        assert_eq!(sym.symbols, vec![1, 1, 1]);
    }

    proptest! {
        #[test]
        fn encoding_is_monotone(mut xs in proptest::collection::vec(-1.0f64..1.0, 10..200)) {
            let th = match quantile_thresholds(&xs, 3) {
                Ok(th) => th,
                Err(_) => return Ok(()), // constant draw
            };
            xs.sort_by(f64::total_cmp);
            let sym = encode(&xs, &th);
            prop_assert!(sym.symbols.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn near_equiprobable_counts(n in 2usize..60, s in 2usize..6) {
            // distinct values, length divisible by the state count
            let series: Vec<f64> = (0..n * s).map(|v| v as f64 * 1.7 + (v as f64 * 0.3).sin()).collect();
            let sym = encode_quantile(&series, s).unwrap();
            let mut counts = vec![0usize; s + 1];
            for &sy in &sym.symbols {
                counts[sy as usize] += 1;
            }
            let (lo, hi) = counts[1..]
                .iter()
                .fold((usize::MAX, 0), |(lo, hi), &c| (lo.min(c), hi.max(c)));
            prop_assert!(hi - lo <= 1, "counts {counts:?}");
        }

        #[test]
        fn reencoding_is_idempotent(m in 4usize..40, jitter in proptest::collection::vec(0.0f64..0.4, 120)) {
            // distinct values, length divisible by 3, so state counts are exact
            let series: Vec<f64> = jitter
                .iter()
                .take(3 * m)
                .enumerate()
                .map(|(i, o)| i as f64 + o)
                .collect();
            let sym = encode_quantile(&series, 3).unwrap();
            let as_reals: Vec<f64> = sym.symbols.iter().map(|&s| s as f64).collect();
            let resym = encode_quantile(&as_reals, 3).unwrap();
            prop_assert_eq!(&resym.symbols, &sym.symbols);
        }
    }
}
