//! Markov-bootstrap significance test for transfer entropy.
//!
//! The null model resamples the SOURCE series from its own fitted Markov
//! transition structure: within-series dependence is preserved, any
//! cross-dependence with the target is destroyed. The p-value is the
//! fraction of resampled transfer entropies at least as large as the
//! observed one.

use rand::Rng;

use crate::encode::SymbolSeries;
use crate::error::{Error, Result};
use crate::info::{TargetContext, TeEstimate, TeScratch};

/// Finite-state Markov model fitted by relative frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    pub order: usize,
    pub alphabet: u8,
    /// Marginal symbol frequencies; the draw for startup symbols.
    pub initial: Vec<f64>,
    /// `transition[h]` is the next-symbol distribution after the
    /// order-length history with base-S code `h` (most recent symbol in the
    /// lowest digit).
    pub transition: Vec<Vec<f64>>,
    /// Histories never observed in the data; they carry a uniform row.
    pub unseen: Vec<bool>,
}

impl MarkovModel {
    /// Cumulative-sum sampling from one distribution row.
    fn draw(dist: &[f64], rng: &mut impl Rng) -> u8 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in dist.iter().enumerate() {
            acc += p;
            if u < acc {
                return i as u8 + 1;
            }
        }
        dist.len() as u8
    }

    /// Generate a series of `length` symbols. The first `order` symbols are
    /// drawn independently from the marginal distribution, the rest from the
    /// transition rows.
    pub fn simulate(&self, length: usize, rng: &mut impl Rng) -> SymbolSeries {
        let s = self.alphabet as usize;
        let mut symbols = Vec::with_capacity(length);
        let mut code = 0usize;
        let modulus = s.pow(self.order as u32);
        for t in 0..length {
            let sym = if t < self.order {
                Self::draw(&self.initial, rng)
            } else {
                Self::draw(&self.transition[code], rng)
            };
            symbols.push(sym);
            code = (code * s + (sym - 1) as usize) % modulus;
        }
        SymbolSeries {
            symbols,
            alphabet: self.alphabet,
            thresholds: Vec::new(),
        }
    }
}

/// Fit an order-`order` Markov model to a symbol series. The initial
/// distribution is the marginal symbol frequency; transition rows are
/// empirical conditional frequencies, with unobserved histories getting a
/// uniform row (flagged in `unseen`).
pub fn fit_markov(series: &SymbolSeries, order: usize) -> Result<MarkovModel> {
    if order == 0 {
        return Err(Error::InvalidParameter {
            name: "order",
            detail: "must be >= 1".into(),
        });
    }
    if series.len() <= order {
        return Err(Error::InsufficientData {
            what: "Markov fit",
            needed: order + 1,
            have: series.len(),
        });
    }
    let s = series.alphabet as usize;
    let histories = s
        .checked_pow(order as u32)
        .filter(|&h| h <= (1 << 24))
        .ok_or(Error::InvalidParameter {
            name: "order",
            detail: format!("history table {s}^{order} too large"),
        })?;

    let mut marginal = vec![0u64; s];
    for &sym in &series.symbols {
        marginal[(sym - 1) as usize] += 1;
    }
    let total = series.len() as f64;
    let initial: Vec<f64> = marginal.iter().map(|&c| c as f64 / total).collect();

    let z = &series.symbols;
    let mut counts = vec![0u64; histories * s];
    for t in (order - 1)..(z.len() - 1) {
        let mut code = 0usize;
        for j in 0..order {
            code = code * s + (z[t - j] - 1) as usize;
        }
        counts[code * s + (z[t + 1] - 1) as usize] += 1;
    }

    let mut transition = Vec::with_capacity(histories);
    let mut unseen = Vec::with_capacity(histories);
    for h in 0..histories {
        let row = &counts[h * s..(h + 1) * s];
        let row_total: u64 = row.iter().sum();
        if row_total == 0 {
            transition.push(vec![1.0 / s as f64; s]);
            unseen.push(true);
        } else {
            transition.push(row.iter().map(|&c| c as f64 / row_total as f64).collect());
            unseen.push(false);
        }
    }

    Ok(MarkovModel {
        order,
        alphabet: series.alphabet,
        initial,
        transition,
        unseen,
    })
}

/// Outcome of the bootstrap significance test for one ordered pair.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SignificanceResult {
    pub te_observed: f64,
    /// `exceed_count / n_boot`, exactly.
    pub p_value: f64,
    pub n_boot: usize,
    /// Bootstrap estimates >= the observed value (ties count).
    pub exceed_count: usize,
    /// Observed TE minus the bootstrap mean. Reported for diagnostics only;
    /// network weights always carry the raw estimate.
    pub te_bias_corrected: f64,
}

/// Bootstrap the source `n_boot` times from its fitted order-`k` Markov
/// model, recompute transfer entropy against the unmodified target each
/// time, and return the exceedance p-value.
pub fn te_pvalue(
    source: &SymbolSeries,
    target: &SymbolSeries,
    k: usize,
    l: usize,
    n_boot: usize,
    rng: &mut impl Rng,
) -> Result<(TeEstimate, SignificanceResult)> {
    let ctx = TargetContext::new(target, k, l)?;
    let observed = ctx.te(source)?;
    let model = fit_markov(source, k)?;
    let sig = bootstrap_significance(&ctx, &model, source.len(), observed, n_boot, rng)?;
    Ok((observed, sig))
}

/// Bootstrap against a prebuilt target context and source model; the
/// pipeline path, where one context serves every source column and one
/// model serves every target column of that source.
pub fn bootstrap_significance(
    ctx: &TargetContext,
    model: &MarkovModel,
    series_len: usize,
    observed: TeEstimate,
    n_boot: usize,
    rng: &mut impl Rng,
) -> Result<SignificanceResult> {
    if n_boot < 1 {
        return Err(Error::InvalidParameter {
            name: "n_boot",
            detail: "must be >= 1".into(),
        });
    }
    let mut scratch = TeScratch::default();
    let mut exceed = 0usize;
    let mut boot_sum = 0.0;
    for _ in 0..n_boot {
        let resampled = model.simulate(series_len, rng);
        let boot = ctx.te_with_scratch(&resampled, &mut scratch)?;
        boot_sum += boot.te_bits;
        if boot.te_bits >= observed.te_bits {
            exceed += 1;
        }
    }
    Ok(SignificanceResult {
        te_observed: observed.te_bits,
        p_value: exceed as f64 / n_boot as f64,
        n_boot,
        exceed_count: exceed,
        te_bias_corrected: observed.te_bits - boot_sum / n_boot as f64,
    })
}
