//! Rolling-window estimation and regime aggregation.
//!
//! The full experiment: slide a fixed-length window over the panel, estimate
//! every ordered pair's normalized transfer entropy inside each window,
//! bootstrap significance, and collect per-window network metrics. Regime
//! reports run one span-wide estimation per analyst-chosen date range and
//! attach the influencer tables, the maximum spanning arborescence, and the
//! degree distributions.
//!
//! Parallelism is two-level (windows across workers, ordered pairs within a
//! window) and every bootstrap stream is keyed by (master seed, span, source
//! index, target index), so artifacts are byte-identical for any thread
//! count.

use chrono::NaiveDate;
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::bootstrap::{bootstrap_significance, fit_markov, MarkovModel};
use crate::encode::{encode, quantile_thresholds, SymbolSeries, Thresholds};
use crate::error::{Error, Result};
use crate::graph::{
    density, jaccard, max_spanning_arborescence, top_influencers, weighted_degrees, Arborescence,
    DateWindow, DegreeTable, InfluencerReport, SpilloverNetwork,
};
use crate::info::TargetContext;
use crate::panel::SentimentPanel;
use crate::rng::{pair_coord, stream, StreamDomain};

/// Settings for the rolling experiment.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Observations per window.
    pub window_length: usize,
    /// Window start offset between consecutive windows.
    pub step: usize,
    /// Target history length.
    pub k: usize,
    /// Source history length.
    pub l: usize,
    /// Quantile states per series.
    pub n_states: usize,
    /// Significance level for the edge mask.
    pub alpha: f64,
    /// Bootstrap replicates per ordered pair.
    pub n_boot: usize,
    pub master_seed: u64,
    /// Regime boundaries; n breaks give n+1 regimes.
    pub regime_breaks: Vec<NaiveDate>,
    /// Encode on whole-panel thresholds instead of window-local ones.
    pub global_thresholds: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            window_length: 200,
            step: 10,
            k: 1,
            l: 1,
            n_states: 3,
            alpha: 0.10,
            n_boot: 300,
            master_seed: 0,
            regime_breaks: Vec::new(),
            global_thresholds: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.step < 1 {
            return Err(Error::InvalidParameter {
                name: "step",
                detail: "must be >= 1".into(),
            });
        }
        if self.k < 1 || self.l < 1 {
            return Err(Error::InvalidParameter {
                name: "history length",
                detail: "k and l must be >= 1".into(),
            });
        }
        if self.n_states < 2 {
            return Err(Error::InvalidParameter {
                name: "n_states",
                detail: "must be >= 2".into(),
            });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                detail: format!("{} outside (0, 1)", self.alpha),
            });
        }
        if self.n_boot < 1 {
            return Err(Error::InvalidParameter {
                name: "n_boot",
                detail: "must be >= 1".into(),
            });
        }
        if self.window_length < self.min_span_length() {
            return Err(Error::InvalidParameter {
                name: "window_length",
                detail: format!(
                    "{} is below the minimum estimable span {}",
                    self.window_length,
                    self.min_span_length()
                ),
            });
        }
        for w in self.regime_breaks.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidParameter {
                    name: "regime_breaks",
                    detail: "breaks must be strictly increasing".into(),
                });
            }
        }
        Ok(())
    }

    /// Fewest observations a span can have and still be estimable.
    pub fn min_span_length(&self) -> usize {
        self.n_states.max(self.k.max(self.l) + 2)
    }
}

/// One rolling window: row range `[start, end)` plus its calendar span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct WindowSpec {
    pub index: usize,
    pub start: usize,
    pub end: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
}

/// Windows `[0, L), [step, step + L), ...`; the last partial window is
/// dropped.
pub fn enumerate_windows(panel: &SentimentPanel, cfg: &PipelineConfig) -> Result<Vec<WindowSpec>> {
    cfg.validate()?;
    let t = panel.n_rows();
    if t < cfg.window_length {
        return Err(Error::InsufficientData {
            what: "rolling windows",
            needed: cfg.window_length,
            have: t,
        });
    }
    let count = (t - cfg.window_length) / cfg.step + 1;
    Ok((0..count)
        .map(|i| {
            let start = i * cfg.step;
            let end = start + cfg.window_length;
            WindowSpec {
                index: i,
                start,
                end,
                start_date: panel.dates[start],
                end_date: panel.dates[end - 1],
            }
        })
        .collect())
}

fn complete_column(panel: &SentimentPanel, c: usize, start: usize, end: usize) -> Result<Vec<f64>> {
    panel.values[c][start..end]
        .iter()
        .map(|v| {
            v.ok_or_else(|| Error::InvalidParameter {
                name: "panel",
                detail: format!(
                    "column {} has missing values; impute before estimation",
                    panel.tickers[c]
                ),
            })
        })
        .collect()
}

/// Estimate the spillover network over rows `[start, end)`.
///
/// Degenerate (constant-in-span) columns are excluded: their edges carry
/// zero weight and p-value 1. Columns are encoded on span-local quantile
/// thresholds unless `cfg.global_thresholds` is set.
fn estimate_span(
    panel: &SentimentPanel,
    start: usize,
    end: usize,
    cfg: &PipelineConfig,
    domain: StreamDomain,
    span_index: u64,
) -> Result<SpilloverNetwork> {
    let n = panel.n_cols();

    struct ColumnState {
        symbols: SymbolSeries,
        context: TargetContext,
        model: MarkovModel,
    }

    let columns: Vec<Option<ColumnState>> = (0..n)
        .map(|c| -> Result<Option<ColumnState>> {
            let values = complete_column(panel, c, start, end)?;
            let threshold_basis: Vec<f64> = if cfg.global_thresholds {
                complete_column(panel, c, 0, panel.n_rows())?
            } else {
                values.clone()
            };
            let thresholds: Thresholds = match quantile_thresholds(&threshold_basis, cfg.n_states)
            {
                Ok(t) => t,
                Err(Error::Degenerate { .. }) | Err(Error::InsufficientData { .. }) => {
                    return Ok(None)
                }
                Err(e) => return Err(e),
            };
            let symbols = encode(&values, &thresholds);
            let context = TargetContext::new(&symbols, cfg.k, cfg.l)?;
            let model = fit_markov(&symbols, cfg.k)?;
            Ok(Some(ColumnState {
                symbols,
                context,
                model,
            }))
        })
        .collect::<Result<Vec<_>>>()?;

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|(i, j)| i != j && columns[*i].is_some() && columns[*j].is_some())
        .collect();

    struct PairResult {
        i: usize,
        j: usize,
        te_bits: f64,
        te_norm: f64,
        p_value: f64,
    }

    let results: Vec<Result<PairResult>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let source = columns[i].as_ref().unwrap();
            let target = columns[j].as_ref().unwrap();
            let observed = target.context.te(&source.symbols)?;
            let mut rng = stream(cfg.master_seed, domain, span_index, pair_coord(i, j));
            let sig = bootstrap_significance(
                &target.context,
                &source.model,
                source.symbols.len(),
                observed,
                cfg.n_boot,
                &mut rng,
            )?;
            Ok(PairResult {
                i,
                j,
                te_bits: observed.te_bits,
                te_norm: observed.te_normalized,
                p_value: sig.p_value,
            })
        })
        .collect();

    let mut te_bits = DMatrix::zeros(n, n);
    let mut te_norm = DMatrix::zeros(n, n);
    let mut pvalues = DMatrix::from_element(n, n, 1.0);
    for r in results {
        let r = r?;
        te_bits[(r.i, r.j)] = r.te_bits;
        te_norm[(r.i, r.j)] = r.te_norm;
        pvalues[(r.i, r.j)] = r.p_value;
    }
    let excluded: Vec<String> = (0..n)
        .filter(|&c| columns[c].is_none())
        .map(|c| panel.tickers[c].clone())
        .collect();

    Ok(
        SpilloverNetwork::build_network(panel.tickers.clone(), te_norm, pvalues, cfg.alpha)?
            .with_te_bits(te_bits)
            .with_window(DateWindow {
                start: panel.dates[start],
                end: panel.dates[end - 1],
            })
            .with_excluded(excluded),
    )
}

/// Estimate one rolling window's network.
pub fn window_network(
    panel: &SentimentPanel,
    window: &WindowSpec,
    cfg: &PipelineConfig,
) -> Result<SpilloverNetwork> {
    estimate_span(
        panel,
        window.start,
        window.end,
        cfg,
        StreamDomain::WindowBootstrap,
        window.index as u64,
    )
}

/// Per-window metric series collected over a rolling run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MetricSeries {
    pub end_dates: Vec<NaiveDate>,
    pub density_unfiltered: Vec<f64>,
    pub density_filtered: Vec<f64>,
    /// Significant directed-edge counts.
    pub edge_counts: Vec<usize>,
    /// `in_degrees[w][v]`: filtered weighted in-degree of vertex v in window w.
    pub in_degrees: Vec<Vec<f64>>,
    pub out_degrees: Vec<Vec<f64>>,
    /// Jaccard similarity of each window's significant edge set with the
    /// previous window's (a stability diagnostic; None for the first window).
    pub jaccard_prev: Vec<Option<f64>>,
}

/// Collect the metric series from per-window networks.
pub fn metric_series(networks: &[SpilloverNetwork]) -> Result<MetricSeries> {
    if networks.is_empty() {
        return Err(Error::InsufficientData {
            what: "metric series",
            needed: 1,
            have: 0,
        });
    }
    let mut out = MetricSeries {
        end_dates: Vec::new(),
        density_unfiltered: Vec::new(),
        density_filtered: Vec::new(),
        edge_counts: Vec::new(),
        in_degrees: Vec::new(),
        out_degrees: Vec::new(),
        jaccard_prev: Vec::new(),
    };
    for (w, net) in networks.iter().enumerate() {
        out.end_dates.push(
            net.window
                .map(|dw| dw.end)
                .unwrap_or_else(|| NaiveDate::from_ymd_opt(1970, 1, 1).unwrap()),
        );
        out.density_unfiltered.push(density(net, false)?);
        out.density_filtered.push(density(net, true)?);
        out.edge_counts.push(net.significant_edge_count());
        let d = weighted_degrees(net, true);
        out.in_degrees.push(d.in_degree);
        out.out_degrees.push(d.out_degree);
        out.jaccard_prev.push(if w == 0 {
            None
        } else {
            Some(jaccard(&networks[w - 1], net, true)?)
        });
    }
    Ok(out)
}

/// Jaccard similarity between two runs' same-index networks (e.g. the news
/// panel against the social-media panel).
pub fn cross_run_jaccard(
    a: &[SpilloverNetwork],
    b: &[SpilloverNetwork],
) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            detail: format!("{} windows vs {}", a.len(), b.len()),
        });
    }
    a.iter().zip(b).map(|(x, y)| jaccard(x, y, true)).collect()
}

/// Everything a rolling run produces.
#[derive(Debug, Clone)]
pub struct RollingOutput {
    pub windows: Vec<WindowSpec>,
    pub networks: Vec<SpilloverNetwork>,
    pub metrics: MetricSeries,
}

/// Run the rolling experiment on a complete panel. Windows are estimated in
/// parallel; output is deterministic in (panel, config).
pub fn run_rolling(panel: &SentimentPanel, cfg: &PipelineConfig) -> Result<RollingOutput> {
    let windows = enumerate_windows(panel, cfg)?;
    let networks: Vec<Result<SpilloverNetwork>> = windows
        .par_iter()
        .map(|w| window_network(panel, w, cfg))
        .collect();
    let networks: Vec<SpilloverNetwork> = networks.into_iter().collect::<Result<_>>()?;
    let metrics = metric_series(&networks)?;
    Ok(RollingOutput {
        windows,
        networks,
        metrics,
    })
}

/// Span-wide analysis of one regime.
#[derive(Debug, Clone)]
pub struct RegimeReport {
    pub index: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub n_obs: usize,
    pub network: SpilloverNetwork,
    /// Top-5 influencer rankings on the dense (unfiltered) regime network.
    pub influencers: InfluencerReport,
    pub arborescence: Arborescence,
    /// Full per-vertex degree distribution on the dense regime network.
    pub degrees: DegreeTable,
}

/// Number of influencers reported per ranking.
pub const TOP_INFLUENCERS: usize = 5;

/// Slice the panel at the configured break dates and run one span-wide
/// estimation per regime. Analytics run on the dense (unfiltered) regime
/// network; significance estimates are still attached for the filtered view.
pub fn regime_report(panel: &SentimentPanel, cfg: &PipelineConfig) -> Result<Vec<RegimeReport>> {
    cfg.validate()?;
    let t = panel.n_rows();
    if t == 0 {
        return Err(Error::InsufficientData {
            what: "regime report",
            needed: 1,
            have: 0,
        });
    }
    let first = panel.dates[0];
    let last = panel.dates[t - 1];
    for b in &cfg.regime_breaks {
        if *b <= first || *b > last {
            return Err(Error::InvalidParameter {
                name: "regime_breaks",
                detail: format!("break {b} outside the panel range ({first}, {last}]"),
            });
        }
    }

    // Row index of each break: first row at or after the break date.
    let mut bounds = vec![0usize];
    for b in &cfg.regime_breaks {
        bounds.push(panel.dates.partition_point(|d| d < b));
    }
    bounds.push(t);

    let mut reports = Vec::new();
    for r in 0..bounds.len() - 1 {
        let (start, end) = (bounds[r], bounds[r + 1]);
        let len = end - start;
        if len < cfg.min_span_length() {
            return Err(Error::InsufficientData {
                what: "regime span",
                needed: cfg.min_span_length(),
                have: len,
            });
        }
        let network = estimate_span(
            panel,
            start,
            end,
            cfg,
            StreamDomain::RegimeBootstrap,
            r as u64,
        )?;
        let influencers = top_influencers(&network, TOP_INFLUENCERS.min(network.n()), false)?;
        let arborescence = max_spanning_arborescence(&network, false)?;
        let degrees = weighted_degrees(&network, false);
        reports.push(RegimeReport {
            index: r,
            start_date: panel.dates[start],
            end_date: panel.dates[end - 1],
            n_obs: len,
            network,
            influencers,
            arborescence,
            degrees,
        });
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    fn small_cfg(seed: u64) -> PipelineConfig {
        PipelineConfig {
            window_length: 60,
            step: 20,
            n_boot: 25,
            master_seed: seed,
            ..PipelineConfig::default()
        }
    }

    fn small_panel(seed: u64, cols: usize, rows: usize) -> SentimentPanel {
        synthetic::random_panel(&synthetic::RandomPanelSpec {
            rows,
            cols,
            missing_low: 0.0,
            missing_high: 0.0,
            seed,
        })
    }

    #[test]
    fn window_count_formula() {
        let panel = small_panel(1, 2, 1319);
        let cfg = PipelineConfig {
            window_length: 200,
            step: 10,
            ..PipelineConfig::default()
        };
        let windows = enumerate_windows(&panel, &cfg).unwrap();
        assert_eq!(windows.len(), 112);
        assert_eq!(windows[0].start, 0);
        assert_eq!(windows[0].end, 200);
        assert_eq!(windows[1].start, 10);
        assert_eq!(windows[111].end, 1310);
    }

    #[test]
    fn exact_fit_single_window() {
        let panel = small_panel(2, 2, 200);
        let cfg = PipelineConfig::default();
        let windows = enumerate_windows(&panel, &cfg).unwrap();
        assert_eq!(windows.len(), 1);
    }

    #[test]
    fn short_panel_errors() {
        let panel = small_panel(3, 2, 199);
        let cfg = PipelineConfig::default();
        assert!(enumerate_windows(&panel, &cfg).is_err());
    }

    #[test]
    fn window_count_property() {
        let cfg0 = PipelineConfig::default();
        for (t, w, s) in [(100usize, 30usize, 7usize), (57, 10, 1), (500, 100, 50)] {
            let panel = small_panel(4, 2, t);
            let cfg = PipelineConfig {
                window_length: w,
                step: s,
                ..cfg0.clone()
            };
            let windows = enumerate_windows(&panel, &cfg).unwrap();
            assert_eq!(windows.len(), (t - w) / s + 1, "t={t} w={w} s={s}");
        }
    }

    #[test]
    fn filtered_density_never_exceeds_unfiltered() {
        let panel = small_panel(5, 4, 140);
        let out = run_rolling(&panel, &small_cfg(9)).unwrap();
        for (f, u) in out
            .metrics
            .density_filtered
            .iter()
            .zip(&out.metrics.density_unfiltered)
        {
            assert!(f <= u);
        }
    }

    #[test]
    fn single_window_metrics_length_one() {
        let panel = small_panel(6, 3, 60);
        let cfg = PipelineConfig {
            window_length: 60,
            step: 10,
            n_boot: 10,
            master_seed: 1,
            ..PipelineConfig::default()
        };
        let out = run_rolling(&panel, &cfg).unwrap();
        assert_eq!(out.networks.len(), 1);
        assert_eq!(out.metrics.density_filtered.len(), 1);
        assert_eq!(out.metrics.jaccard_prev, vec![None]);
    }

    #[test]
    fn degenerate_column_excluded_without_touching_others() {
        let mut panel = small_panel(7, 3, 80);
        let cfg = PipelineConfig {
            window_length: 80,
            step: 10,
            n_boot: 15,
            master_seed: 3,
            ..PipelineConfig::default()
        };
        let base = run_rolling(&panel, &cfg).unwrap();

        // Append a constant column: it must be excluded, and the original
        // pair estimates must be unchanged (pairwise locality).
        panel.tickers.push("ZZZ".into());
        panel.values.push(vec![Some(0.0); panel.n_rows()]);
        let with_const = run_rolling(&panel, &cfg).unwrap();
        let net = &with_const.networks[0];
        assert_eq!(net.excluded, vec!["ZZZ".to_string()]);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(
                    net.weights[(i, j)],
                    base.networks[0].weights[(i, j)],
                    "weight ({i},{j})"
                );
                assert_eq!(net.pvalues[(i, j)], base.networks[0].pvalues[(i, j)]);
            }
        }
        let z = 3;
        for i in 0..4 {
            assert_eq!(net.weights[(i, z)], 0.0);
            assert_eq!(net.weights[(z, i)], 0.0);
            assert_eq!(net.pvalues[(i, z)], 1.0);
        }
    }

    #[test]
    fn rolling_deterministic_across_thread_counts() {
        let panel = small_panel(8, 3, 100);
        let cfg = PipelineConfig {
            window_length: 60,
            step: 40,
            n_boot: 20,
            master_seed: 11,
            ..PipelineConfig::default()
        };
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let out1 = pool1.install(|| run_rolling(&panel, &cfg)).unwrap();
        let out4 = pool4.install(|| run_rolling(&panel, &cfg)).unwrap();
        assert_eq!(out1.networks, out4.networks);
    }

    #[test]
    fn planted_coupling_detected() {
        // A drives B strongly; the A->B edge should be significant in most
        // windows while typical noise pairs are not.
        let panel = synthetic::hub_panel(&synthetic::HubPanelSpec {
            rows: 420,
            n_driven: 1,
            n_noise: 1,
            coupling: 0.9,
            noise_sd: 0.05,
            seed: 13,
        });
        let cfg = PipelineConfig {
            window_length: 200,
            step: 20,
            n_boot: 60,
            master_seed: 5,
            ..PipelineConfig::default()
        };
        let out = run_rolling(&panel, &cfg).unwrap();
        let hub = 0usize; // hub is the first column
        let driven = 1usize;
        let hits = out
            .networks
            .iter()
            .filter(|net| net.significant[(hub, driven)])
            .count();
        assert!(
            hits * 10 >= out.networks.len() * 9,
            "coupled edge significant in {hits}/{} windows",
            out.networks.len()
        );
    }

    #[test]
    fn regime_breaks_slice_panel() {
        let panel = small_panel(9, 3, 120);
        let cfg = PipelineConfig {
            window_length: 40,
            step: 10,
            n_boot: 10,
            master_seed: 2,
            regime_breaks: vec![panel.dates[40], panel.dates[80]],
            ..PipelineConfig::default()
        };
        let reports = regime_report(&panel, &cfg).unwrap();
        assert_eq!(reports.len(), 3);
        assert_eq!(reports[0].n_obs, 40);
        assert_eq!(reports[1].n_obs, 40);
        assert_eq!(reports[2].n_obs, 40);
        assert_eq!(reports[0].start_date, panel.dates[0]);
        assert_eq!(reports[1].start_date, panel.dates[40]);
        for r in &reports {
            assert_eq!(r.influencers.pagerank.len(), 3);
            assert_eq!(r.arborescence.labels.len(), 3);
        }
    }

    #[test]
    fn regime_break_outside_range_errors() {
        let panel = small_panel(10, 2, 50);
        let cfg = PipelineConfig {
            window_length: 40,
            regime_breaks: vec![panel.dates[49] + chrono::Days::new(10)],
            ..PipelineConfig::default()
        };
        assert!(regime_report(&panel, &cfg).is_err());
    }

    #[test]
    fn hub_regime_report_identifies_hub() {
        let panel = synthetic::hub_panel(&synthetic::HubPanelSpec {
            rows: 300,
            n_driven: 5,
            n_noise: 4,
            coupling: 0.8,
            noise_sd: 0.05,
            seed: 21,
        });
        let cfg = PipelineConfig {
            window_length: 100,
            n_boot: 30,
            master_seed: 17,
            ..PipelineConfig::default()
        };
        let reports = regime_report(&panel, &cfg).unwrap();
        assert_eq!(reports.len(), 1);
        let r = &reports[0];
        assert_eq!(r.influencers.out_degree[0].label, "HUB");
        assert_eq!(r.influencers.pagerank[0].label, "HUB");
        assert_eq!(r.arborescence.root_label(), "HUB");
    }
}
