//! Artifact serialization: network JSON, DOT graphs, metric CSVs, and the
//! rolling/regime output tree.
//!
//! Layout written by a rolling run:
//!
//! ```text
//! out/
//!   networks/window_<idx>.json
//!   metrics/density.csv
//!   metrics/degrees_in.csv
//!   metrics/degrees_out.csv
//!   metrics/jaccard.csv
//!   regimes/<r>/report.json      (when regime breaks are configured)
//!   regimes/<r>/msa.dot
//! ```
//!
//! Floats are printed in shortest round-trippable form everywhere, so
//! identical runs produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{density, Arborescence, DateWindow, SpilloverNetwork};
use crate::panel::StatsSummary;
use crate::pipeline::{MetricSeries, RegimeReport, RollingOutput};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(path))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

// ---------------------------------------------------------------------------
// Network JSON
// ---------------------------------------------------------------------------

/// One directed edge in the interchange JSON.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EdgeJson {
    pub src: String,
    pub dst: String,
    /// Raw transfer entropy in bits.
    pub te: f64,
    /// Normalized transfer entropy (the network weight).
    pub te_norm: f64,
    /// Bootstrap p-value.
    pub p: f64,
    pub significant: bool,
}

/// Interchange form of a spillover network: every ordered pair listed.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NetworkJson {
    pub labels: Vec<String>,
    pub alpha: f64,
    pub window: Option<DateWindow>,
    #[serde(default)]
    pub excluded: Vec<String>,
    pub edges: Vec<EdgeJson>,
}

impl NetworkJson {
    pub fn from_network(net: &SpilloverNetwork) -> Self {
        let n = net.n();
        let mut edges = Vec::with_capacity(n * (n - 1));
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                edges.push(EdgeJson {
                    src: net.labels[i].clone(),
                    dst: net.labels[j].clone(),
                    te: net.te_bits[(i, j)],
                    te_norm: net.weights[(i, j)],
                    p: net.pvalues[(i, j)],
                    significant: net.significant[(i, j)],
                });
            }
        }
        NetworkJson {
            labels: net.labels.clone(),
            alpha: net.alpha,
            window: net.window,
            excluded: net.excluded.clone(),
            edges,
        }
    }

    /// Rebuild the in-memory network. Unlisted pairs get zero weight and
    /// p-value 1.
    pub fn into_network(self) -> Result<SpilloverNetwork> {
        let n = self.labels.len();
        let index = |label: &str| -> Result<usize> {
            self.labels
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| Error::LabelMismatch {
                    detail: format!("edge endpoint {label} not in label list"),
                })
        };
        let mut te_bits = DMatrix::zeros(n, n);
        let mut te_norm = DMatrix::zeros(n, n);
        let mut pvalues = DMatrix::from_element(n, n, 1.0);
        for e in &self.edges {
            let i = index(&e.src)?;
            let j = index(&e.dst)?;
            te_bits[(i, j)] = e.te;
            te_norm[(i, j)] = e.te_norm;
            pvalues[(i, j)] = e.p;
        }
        let mut net =
            SpilloverNetwork::build_network(self.labels, te_norm, pvalues, self.alpha)?
                .with_te_bits(te_bits)
                .with_excluded(self.excluded);
        net.window = self.window;
        Ok(net)
    }
}

/// Write one network as pretty-printed JSON.
pub fn write_network_json(path: &Path, net: &SpilloverNetwork) -> Result<()> {
    let json = serde_json::to_string_pretty(&NetworkJson::from_network(net))
        .expect("network serialization cannot fail");
    write_file(path, &json)
}

/// Read a network back from its interchange JSON.
pub fn read_network_json(path: &Path) -> Result<SpilloverNetwork> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let parsed: NetworkJson = serde_json::from_str(&text).map_err(|e| Error::Parse {
        location: path.display().to_string(),
        message: e.to_string(),
    })?;
    parsed.into_network()
}

// ---------------------------------------------------------------------------
// DOT
// ---------------------------------------------------------------------------

/// DOT digraph of the requested network view, edges labeled with weights.
pub fn network_dot(net: &SpilloverNetwork, filtered: bool) -> String {
    let w = net.view(filtered);
    let mut out = String::from("digraph spillover {\n  rankdir=LR;\n");
    for label in &net.labels {
        let _ = writeln!(out, "  \"{label}\";");
    }
    for i in 0..net.n() {
        for j in 0..net.n() {
            if w[(i, j)] > 0.0 {
                let _ = writeln!(
                    out,
                    "  \"{}\" -> \"{}\" [label=\"{:.4}\"];",
                    net.labels[i],
                    net.labels[j],
                    w[(i, j)]
                );
            }
        }
    }
    out.push_str("}\n");
    out
}

/// DOT digraph of an arborescence. Edges on the maximum-weight root-to-leaf
/// path are drawn red; the minimum-weight path (when distinct) orange.
pub fn arborescence_dot(arb: &Arborescence) -> String {
    let edge_set = |path: Option<&crate::graph::TreePath>| -> Vec<(usize, usize)> {
        path.map(|p| p.vertices.windows(2).map(|w| (w[0], w[1])).collect())
            .unwrap_or_default()
    };
    let max_edges = edge_set(arb.max_weight_path());
    let min_edges = edge_set(arb.min_weight_path());

    let mut out = String::from("digraph arborescence {\n  rankdir=LR;\n");
    let _ = writeln!(
        out,
        "  \"{}\" [shape=doublecircle];",
        arb.labels[arb.root]
    );
    for (v, p) in arb.parent.iter().enumerate() {
        if let Some((u, weight)) = p {
            let mut attrs = format!("label=\"{weight:.4}\"");
            if max_edges.contains(&(*u, v)) {
                attrs.push_str(", color=\"red\", penwidth=2.0");
            } else if min_edges.contains(&(*u, v)) {
                attrs.push_str(", color=\"orange\"");
            }
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [{attrs}];",
                arb.labels[*u], arb.labels[v]
            );
        }
    }
    out.push_str("}\n");
    out
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Descriptive-statistics table, one row per ticker.
pub fn stats_csv(tickers: &[String], stats: &[StatsSummary]) -> String {
    let mut out = String::from(
        "ticker,min,max,mean,sd,q25,q75,skewness,kurtosis,n_missing,missing_fraction,degenerate\n",
    );
    for (t, s) in tickers.iter().zip(stats) {
        let _ = writeln!(
            out,
            "{t},{},{},{},{},{},{},{},{},{},{},{}",
            s.min,
            s.max,
            s.mean,
            s.sd,
            s.q25,
            s.q75,
            s.skewness,
            s.kurtosis,
            s.n_missing,
            s.missing_fraction,
            s.degenerate
        );
    }
    out
}

fn density_csv(metrics: &MetricSeries) -> String {
    let mut out =
        String::from("window,end_date,density_unfiltered,density_filtered,significant_edges\n");
    for w in 0..metrics.end_dates.len() {
        let _ = writeln!(
            out,
            "{w},{},{},{},{}",
            metrics.end_dates[w],
            metrics.density_unfiltered[w],
            metrics.density_filtered[w],
            metrics.edge_counts[w]
        );
    }
    out
}

fn degrees_csv(metrics: &MetricSeries, labels: &[String], incoming: bool) -> String {
    let mut out = String::from("window,end_date");
    for l in labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    let table = if incoming {
        &metrics.in_degrees
    } else {
        &metrics.out_degrees
    };
    for w in 0..metrics.end_dates.len() {
        let _ = write!(out, "{w},{}", metrics.end_dates[w]);
        for v in &table[w] {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

fn rolling_jaccard_csv(metrics: &MetricSeries) -> String {
    let mut out = String::from("window,end_date,jaccard_prev_window\n");
    for w in 0..metrics.end_dates.len() {
        match metrics.jaccard_prev[w] {
            Some(j) => {
                let _ = writeln!(out, "{w},{},{j}", metrics.end_dates[w]);
            }
            None => {
                let _ = writeln!(out, "{w},{},", metrics.end_dates[w]);
            }
        }
    }
    out
}

/// Cross-run similarity table for the `compare` command.
pub fn cross_jaccard_csv(end_dates: &[chrono::NaiveDate], jaccard: &[f64]) -> String {
    let mut out = String::from("window,end_date,jaccard\n");
    for (w, (d, j)) in end_dates.iter().zip(jaccard).enumerate() {
        let _ = writeln!(out, "{w},{d},{j}");
    }
    out
}

// ---------------------------------------------------------------------------
// Regime report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
struct ArborescenceJson {
    root: String,
    total_weight: f64,
    edges: Vec<ArbEdgeJson>,
    paths: Vec<PathJson>,
}

#[derive(Debug, Clone, serde::Serialize)]
struct ArbEdgeJson {
    parent: String,
    child: String,
    weight: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
struct PathJson {
    vertices: Vec<String>,
    steps: usize,
    weight: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
struct RegimeReportJson<'a> {
    index: usize,
    start_date: chrono::NaiveDate,
    end_date: chrono::NaiveDate,
    n_obs: usize,
    density_unfiltered: f64,
    density_filtered: f64,
    influencers: &'a crate::graph::InfluencerReport,
    arborescence: ArborescenceJson,
    degrees: DegreesJson,
}

#[derive(Debug, Clone, serde::Serialize)]
struct DegreesJson {
    labels: Vec<String>,
    in_degree: Vec<f64>,
    out_degree: Vec<f64>,
}

fn arborescence_json(arb: &Arborescence) -> ArborescenceJson {
    ArborescenceJson {
        root: arb.labels[arb.root].clone(),
        total_weight: arb.total_weight,
        edges: arb
            .parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| {
                p.map(|(u, w)| ArbEdgeJson {
                    parent: arb.labels[u].clone(),
                    child: arb.labels[v].clone(),
                    weight: w,
                })
            })
            .collect(),
        paths: arb
            .paths
            .iter()
            .map(|p| PathJson {
                vertices: p.vertices.iter().map(|&v| arb.labels[v].clone()).collect(),
                steps: p.steps,
                weight: p.weight,
            })
            .collect(),
    }
}

fn paths_csv(arb: &Arborescence) -> String {
    let mut out = String::from("path,steps,total_weight,vertices\n");
    for (i, p) in arb.paths.iter().enumerate() {
        let verts: Vec<&str> = p.vertices.iter().map(|&v| arb.labels[v].as_str()).collect();
        let _ = writeln!(out, "{i},{},{},{}", p.steps, p.weight, verts.join("->"));
    }
    out
}

fn centrality_csv(report: &RegimeReport) -> String {
    let mut out = String::from("metric,rank,label,score\n");
    let sections = [
        ("pagerank", &report.influencers.pagerank),
        ("in_degree", &report.influencers.in_degree),
        ("out_degree", &report.influencers.out_degree),
    ];
    for (name, ranking) in sections {
        for (rank, rv) in ranking.iter().enumerate() {
            let _ = writeln!(out, "{name},{},{},{}", rank + 1, rv.label, rv.score);
        }
    }
    out
}

fn regime_degrees_csv(report: &RegimeReport) -> String {
    let mut out = String::from("ticker,in_degree,out_degree\n");
    for (i, label) in report.network.labels.iter().enumerate() {
        let _ = writeln!(
            out,
            "{label},{},{}",
            report.degrees.in_degree[i], report.degrees.out_degree[i]
        );
    }
    out
}

/// Write one regime's artifact directory.
pub fn write_regime_artifacts(regime_dir: &Path, report: &RegimeReport) -> Result<()> {
    let json = RegimeReportJson {
        index: report.index,
        start_date: report.start_date,
        end_date: report.end_date,
        n_obs: report.n_obs,
        density_unfiltered: density(&report.network, false)?,
        density_filtered: density(&report.network, true)?,
        influencers: &report.influencers,
        arborescence: arborescence_json(&report.arborescence),
        degrees: DegreesJson {
            labels: report.network.labels.clone(),
            in_degree: report.degrees.in_degree.clone(),
            out_degree: report.degrees.out_degree.clone(),
        },
    };
    write_file(
        &regime_dir.join("report.json"),
        &serde_json::to_string_pretty(&json).expect("report serialization cannot fail"),
    )?;
    write_file(
        &regime_dir.join("msa.dot"),
        &arborescence_dot(&report.arborescence),
    )?;
    write_file(
        &regime_dir.join("network.dot"),
        &network_dot(&report.network, true),
    )?;
    write_file(&regime_dir.join("network.json"), {
        &serde_json::to_string_pretty(&NetworkJson::from_network(&report.network))
            .expect("network serialization cannot fail")
    })?;
    write_file(&regime_dir.join("centrality.csv"), &centrality_csv(report))?;
    write_file(&regime_dir.join("paths.csv"), &paths_csv(&report.arborescence))?;
    write_file(&regime_dir.join("degrees.csv"), &regime_degrees_csv(report))?;
    Ok(())
}

/// Write the full rolling artifact tree under `dir`.
pub fn write_rolling_artifacts(dir: &Path, out: &RollingOutput) -> Result<()> {
    for (w, net) in out.networks.iter().enumerate() {
        write_network_json(&dir.join("networks").join(format!("window_{w}.json")), net)?;
    }
    let labels = &out.networks[0].labels;
    let metrics_dir = dir.join("metrics");
    write_file(&metrics_dir.join("density.csv"), &density_csv(&out.metrics))?;
    write_file(
        &metrics_dir.join("degrees_in.csv"),
        &degrees_csv(&out.metrics, labels, true),
    )?;
    write_file(
        &metrics_dir.join("degrees_out.csv"),
        &degrees_csv(&out.metrics, labels, false),
    )?;
    write_file(
        &metrics_dir.join("jaccard.csv"),
        &rolling_jaccard_csv(&out.metrics),
    )?;
    Ok(())
}

/// Load every `networks/window_<idx>.json` under a results directory, in
/// window order.
pub fn read_run_networks(dir: &Path) -> Result<Vec<SpilloverNetwork>> {
    let networks_dir = dir.join("networks");
    let mut indexed: Vec<(usize, std::path::PathBuf)> = Vec::new();
    let entries = fs::read_dir(&networks_dir).map_err(io_err(&networks_dir))?;
    for entry in entries {
        let entry = entry.map_err(io_err(&networks_dir))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(idx) = name
            .strip_prefix("window_")
            .and_then(|s| s.strip_suffix(".json"))
            .and_then(|s| s.parse::<usize>().ok())
        {
            indexed.push((idx, entry.path()));
        }
    }
    indexed.sort_by_key(|(idx, _)| *idx);
    if indexed.is_empty() {
        return Err(Error::Parse {
            location: networks_dir.display().to_string(),
            message: "no window_<idx>.json files found".into(),
        });
    }
    for (expect, (idx, _)) in indexed.iter().enumerate() {
        if *idx != expect {
            return Err(Error::Parse {
                location: networks_dir.display().to_string(),
                message: format!("window files are not contiguous: missing index {expect}"),
            });
        }
    }
    indexed
        .into_iter()
        .map(|(_, path)| read_network_json(&path))
        .collect()
}
