//! Plug-in estimators for entropy, conditional entropy, and transfer entropy
//! over symbol series, plus the lag-calibration experiment.
//!
//! All probabilities are maximum-likelihood relative frequencies; unobserved
//! tuples contribute nothing (0·log 0 = 0). Logs are base 2 throughout, so
//! every quantity is in bits.
//!
//! Transfer entropy is computed as a difference of conditional entropies,
//!
//! ```text
//! T(Y -> Z) = H(z_{t+1} | z_t^(k)) - H(z_{t+1} | z_t^(k), y_t^(l))
//! ```
//!
//! with every term estimated on one shared aligned index set
//! (t = max(k, l) - 1 .. len - 2). On a shared alignment the plug-in
//! difference is nonnegative by construction; microscopic negatives from
//! floating-point rounding are floored to zero.

use crate::encode::{encode_quantile, SymbolSeries};
use crate::error::{Error, Result};
use crate::panel::simulate_ar1;
use crate::rng::{stream, StreamDomain};

/// Largest joint table we are willing to allocate (`alphabet^(k+l+1)` cells).
const MAX_TABLE_CELLS: usize = 1 << 26;

/// H(Z) over empirical symbol frequencies, in bits.
pub fn shannon_entropy(series: &SymbolSeries) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::InsufficientData {
            what: "entropy",
            needed: 1,
            have: 0,
        });
    }
    let mut counts = vec![0u32; series.alphabet as usize];
    for &s in &series.symbols {
        counts[(s - 1) as usize] += 1;
    }
    let n = series.len();
    let mut acc = 0.0;
    for &c in &counts {
        if c > 0 {
            acc += c as f64 * (c as f64).log2();
        }
    }
    Ok(((n as f64).log2() - acc / n as f64).max(0.0))
}

fn entropy_from_counts(counts: &[u32], n: usize, lut: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &c in counts {
        if c > 0 {
            acc += c as f64 * lut[c as usize];
        }
    }
    (lut[n] - acc / n as f64).max(0.0)
}

fn log2_lut(n: usize) -> Vec<f64> {
    let mut lut = vec![0.0; n + 1];
    for (i, v) in lut.iter_mut().enumerate().skip(1) {
        *v = (i as f64).log2();
    }
    lut
}

fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    let mut acc = 1usize;
    for _ in 0..exp {
        acc = acc.checked_mul(base).filter(|&v| v <= MAX_TABLE_CELLS).ok_or(
            Error::InvalidParameter {
                name: "history length",
                detail: format!("joint table {base}^{exp} exceeds the supported size"),
            },
        )?;
    }
    Ok(acc)
}

/// H(z_{t+1} | z_t^(k)) on the natural alignment for `k`, i.e. the joint
/// entropy of (k+1)-tuples minus the joint entropy of k-tuples, both counted
/// over the same t indices.
pub fn conditional_entropy(series: &SymbolSeries, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            detail: "history length must be >= 1".into(),
        });
    }
    if series.len() <= k {
        return Err(Error::InsufficientData {
            what: "conditional entropy",
            needed: k + 1,
            have: series.len(),
        });
    }
    Ok(conditional_entropy_profile(series, k)?[k - 1])
}

/// Conditional entropies at lags 1..=max_lag, all counted on the shared
/// alignment for `max_lag`. Sharing the alignment makes the profile exactly
/// non-increasing in the lag.
pub fn conditional_entropy_profile(series: &SymbolSeries, max_lag: usize) -> Result<Vec<f64>> {
    if max_lag == 0 {
        return Err(Error::InvalidParameter {
            name: "max_lag",
            detail: "must be >= 1".into(),
        });
    }
    let len = series.len();
    if len <= max_lag {
        return Err(Error::InsufficientData {
            what: "conditional entropy",
            needed: max_lag + 1,
            have: len,
        });
    }
    let s = series.alphabet as usize;
    let n_eff = len - max_lag;
    let lut = log2_lut(n_eff);
    let z = &series.symbols;

    let mut out = Vec::with_capacity(max_lag);
    for lag in 1..=max_lag {
        let hist_cells = checked_pow(s, lag)?;
        checked_pow(s, lag + 1)?;
        let mut hist = vec![0u32; hist_cells];
        let mut joint = vec![0u32; hist_cells * s];
        for t in (max_lag - 1)..(len - 1) {
            let mut code = 0usize;
            for j in 0..lag {
                code = code * s + (z[t - j] - 1) as usize;
            }
            let next = (z[t + 1] - 1) as usize;
            hist[code] += 1;
            joint[next * hist_cells + code] += 1;
        }
        let h_joint = entropy_from_counts(&joint, n_eff, &lut);
        let h_hist = entropy_from_counts(&hist, n_eff, &lut);
        out.push((h_joint - h_hist).max(0.0));
    }
    Ok(out)
}

/// One ordered pair's transfer entropy result.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TeEstimate {
    /// Raw transfer entropy in bits; floored at 0.
    pub te_bits: f64,
    /// `te_bits / H(z_{t+1} | z_t)` with the one-step conditional entropy on
    /// the same alignment, clamped to [0, 1].
    pub te_normalized: f64,
    /// H(z_{t+1} | z_t^(k)) on the shared alignment; upper bound for `te_bits`.
    pub ce_bits: f64,
    pub k: usize,
    pub l: usize,
    /// Number of aligned tuples used.
    pub n_effective: usize,
    /// Set when the normalization denominator is zero (fully determined
    /// target); `te_normalized` is then reported as 0.
    pub degenerate_norm: bool,
}

/// Normalize raw transfer entropy by the target's one-step conditional
/// entropy. Returns the clamped ratio and a degenerate flag for `ce == 0`.
pub fn normalized_te(te_bits: f64, ce_bits: f64) -> (f64, bool) {
    if ce_bits <= 0.0 {
        (0.0, true)
    } else {
        ((te_bits / ce_bits).clamp(0.0, 1.0), false)
    }
}

/// Reusable count buffers for the transfer-entropy hot path.
#[derive(Debug, Default)]
pub struct TeScratch {
    full: Vec<u32>,
    pair: Vec<u32>,
}

/// Everything about the target side of a transfer-entropy estimate that does
/// not depend on the source. Building it once per target lets a bootstrap
/// re-evaluate hundreds of resampled sources cheaply.
#[derive(Debug, Clone)]
pub struct TargetContext {
    len: usize,
    k: usize,
    l: usize,
    alphabet: u8,
    n_eff: usize,
    /// Premultiplied (z_{t+1}, z-history) index per aligned t.
    znzh_base: Vec<u32>,
    /// Premultiplied z-history index per aligned t.
    zh_base: Vec<u32>,
    pow_s_l: usize,
    /// H(z_{t+1} | z_t^(k)) on the shared alignment.
    ce_bits: f64,
    /// H(z_{t+1} | z_t) (one-step) on the shared alignment; Eq.-style
    /// normalization denominator.
    ce_norm_bits: f64,
    lut: Vec<f64>,
}

impl TargetContext {
    pub fn new(target: &SymbolSeries, k: usize, l: usize) -> Result<Self> {
        if k == 0 || l == 0 {
            return Err(Error::InvalidParameter {
                name: "history length",
                detail: format!("k = {k}, l = {l}; both must be >= 1"),
            });
        }
        let len = target.len();
        let offset = k.max(l);
        if len < offset + 2 {
            return Err(Error::InsufficientData {
                what: "transfer entropy",
                needed: offset + 2,
                have: len,
            });
        }
        let s = target.alphabet as usize;
        let pow_s_k = checked_pow(s, k)?;
        let pow_s_l = checked_pow(s, l)?;
        checked_pow(s, k + l + 1)?;

        let n_eff = len - offset;
        let lut = log2_lut(n_eff);
        let z = &target.symbols;

        let mut znzh_base = Vec::with_capacity(n_eff);
        let mut zh_base = Vec::with_capacity(n_eff);
        let mut c_zh = vec![0u32; pow_s_k];
        let mut c_znzh = vec![0u32; pow_s_k * s];
        let mut c_z1 = vec![0u32; s];
        let mut c_znz1 = vec![0u32; s * s];
        for t in (offset - 1)..(len - 1) {
            let mut zh = 0usize;
            for j in 0..k {
                zh = zh * s + (z[t - j] - 1) as usize;
            }
            let zn = (z[t + 1] - 1) as usize;
            c_zh[zh] += 1;
            c_znzh[zn * pow_s_k + zh] += 1;
            let z1 = (z[t] - 1) as usize;
            c_z1[z1] += 1;
            c_znz1[zn * s + z1] += 1;
            znzh_base.push(((zn * pow_s_k + zh) * pow_s_l) as u32);
            zh_base.push((zh * pow_s_l) as u32);
        }
        let ce_bits = (entropy_from_counts(&c_znzh, n_eff, &lut)
            - entropy_from_counts(&c_zh, n_eff, &lut))
        .max(0.0);
        let ce_norm_bits = (entropy_from_counts(&c_znz1, n_eff, &lut)
            - entropy_from_counts(&c_z1, n_eff, &lut))
        .max(0.0);

        Ok(Self {
            len,
            k,
            l,
            alphabet: target.alphabet,
            n_eff,
            znzh_base,
            zh_base,
            pow_s_l,
            ce_bits,
            ce_norm_bits,
            lut,
        })
    }

    /// H(z_{t+1} | z_t^(k)) term this context was built around.
    pub fn ce_bits(&self) -> f64 {
        self.ce_bits
    }

    /// Transfer entropy from `source` into this target.
    pub fn te(&self, source: &SymbolSeries) -> Result<TeEstimate> {
        let mut scratch = TeScratch::default();
        self.te_with_scratch(source, &mut scratch)
    }

    /// Same as [`Self::te`] but reusing caller-provided buffers; the shape of
    /// the hot loop for bootstraps and pair sweeps.
    pub fn te_with_scratch(
        &self,
        source: &SymbolSeries,
        scratch: &mut TeScratch,
    ) -> Result<TeEstimate> {
        if source.len() != self.len {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "source length {} != target length {}",
                    source.len(),
                    self.len
                ),
            });
        }
        if source.alphabet != self.alphabet {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "source alphabet {} != target alphabet {}",
                    source.alphabet, self.alphabet
                ),
            });
        }
        let s = self.alphabet as usize;
        let l = self.l;
        let offset = self.k.max(l);
        let y = &source.symbols;

        let full_cells = self.znzh_base.iter().max().copied().unwrap_or(0) as usize + self.pow_s_l;
        let pair_cells = self.zh_base.iter().max().copied().unwrap_or(0) as usize + self.pow_s_l;
        scratch.full.clear();
        scratch.full.resize(full_cells, 0);
        scratch.pair.clear();
        scratch.pair.resize(pair_cells, 0);

        // Rolling base-s code of the most recent l source symbols.
        let mut yh = 0usize;
        for t in (offset - l)..(offset - 1) {
            yh = (yh * s + (y[t] - 1) as usize) % self.pow_s_l;
        }
        for (idx, t) in ((offset - 1)..(self.len - 1)).enumerate() {
            yh = (yh * s + (y[t] - 1) as usize) % self.pow_s_l;
            scratch.full[self.znzh_base[idx] as usize + yh] += 1;
            scratch.pair[self.zh_base[idx] as usize + yh] += 1;
        }

        let h_full = entropy_from_counts(&scratch.full, self.n_eff, &self.lut);
        let h_pair = entropy_from_counts(&scratch.pair, self.n_eff, &self.lut);
        let ce_joint = (h_full - h_pair).max(0.0);
        let te_bits = (self.ce_bits - ce_joint).max(0.0);
        let (te_normalized, degenerate_norm) = normalized_te(te_bits, self.ce_norm_bits);

        Ok(TeEstimate {
            te_bits,
            te_normalized,
            ce_bits: self.ce_bits,
            k: self.k,
            l,
            n_effective: self.n_eff,
            degenerate_norm,
        })
    }
}

/// Transfer entropy from `source` to `target` with history lengths `k`
/// (target) and `l` (source).
pub fn transfer_entropy(
    source: &SymbolSeries,
    target: &SymbolSeries,
    k: usize,
    l: usize,
) -> Result<TeEstimate> {
    TargetContext::new(target, k, l)?.te(source)
}

/// Conditional-entropy surface over simulated first-order autoregressions,
/// used to pick the history length.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LagCalibration {
    pub sample_sizes: Vec<usize>,
    pub lags: Vec<usize>,
    /// `ce_surface[i][j]` = conditional entropy (bits) at `sample_sizes[i]`,
    /// lag `lags[j]`. Each row is non-increasing in the lag.
    pub ce_surface: Vec<Vec<f64>>,
    /// Largest lag whose joint-tuple table the smallest sample can still
    /// populate; past it the surface collapses because most tuple
    /// probabilities hit zero. 1 on realistic daily-panel window sizes.
    pub recommended_lag: usize,
}

/// A lag is usable only while the (lag+1)-tuple table keeps at least this
/// many observations per cell on the smallest sample.
const MIN_SAMPLES_PER_CELL: usize = 10;

/// AR(1) parameters for the calibration simulations.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ArParams {
    pub intercept: f64,
    pub psi1: f64,
    pub sigma: f64,
}

impl Default for ArParams {
    fn default() -> Self {
        Self {
            intercept: 0.0,
            psi1: 0.5,
            sigma: 0.1,
        }
    }
}

/// Simulate an AR(1) series at each sample size, encode it on `n_states`
/// quantile states, and record conditional entropy at lags 1..=max_lag.
pub fn calibrate_lags(
    sample_sizes: &[usize],
    max_lag: usize,
    n_states: usize,
    ar: ArParams,
    seed: u64,
) -> Result<LagCalibration> {
    if max_lag < 1 {
        return Err(Error::InvalidParameter {
            name: "max_lag",
            detail: "must be >= 1".into(),
        });
    }
    if sample_sizes.is_empty() {
        return Err(Error::InvalidParameter {
            name: "sample_sizes",
            detail: "must not be empty".into(),
        });
    }
    let mut ce_surface = Vec::with_capacity(sample_sizes.len());
    for (i, &n) in sample_sizes.iter().enumerate() {
        let mut rng = stream(seed, StreamDomain::Calibration, i as u64, n as u64);
        let xs = simulate_ar1(ar.intercept, ar.psi1, ar.sigma, n, &mut rng)?;
        let sym = encode_quantile(&xs, n_states)?;
        ce_surface.push(conditional_entropy_profile(&sym, max_lag)?);
    }

    let n_min = *sample_sizes.iter().min().unwrap();
    let n_eff = n_min.saturating_sub(max_lag);
    let mut recommended_lag = 1;
    for lag in 1..=max_lag {
        match n_states.checked_pow(lag as u32 + 1) {
            Some(cells) if cells.saturating_mul(MIN_SAMPLES_PER_CELL) <= n_eff => {
                recommended_lag = lag;
            }
            _ => break,
        }
    }

    Ok(LagCalibration {
        sample_sizes: sample_sizes.to_vec(),
        lags: (1..=max_lag).collect(),
        ce_surface,
        recommended_lag,
    })
}
