//! Command-line driver: each pipeline stage as a subcommand, JSON config
//! with flag overrides, deterministic seeding, and a manifest next to every
//! artifact tree.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical error.
//! Progress goes to stderr; files (or stdout, for the streaming commands)
//! carry the machine-readable output.

mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use chrono::NaiveDate;
use clap::{Parser, Subcommand, ValueEnum};

use spillnet::bootstrap::te_pvalue;
use spillnet::encode::{encode, quantile_thresholds};
use spillnet::export;
use spillnet::impute::{impute_panel, LeadingFill, NoisePolicy, PanelImputeConfig};
use spillnet::info::{calibrate_lags, ArParams};
use spillnet::panel::{describe, load_panel, SentimentPanel};
use spillnet::pipeline::{regime_report, run_rolling, PipelineConfig};

use manifest::ManifestRecorder;

#[derive(Parser)]
#[command(
    name = "spillnet",
    version,
    about = "Sentiment spillover networks from pairwise transfer entropy",
    propagate_version = true
)]
struct Cli {
    /// JSON config file; explicit flags override its values. A previous
    /// run's run_manifest.json is also accepted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores). Output bytes do not depend on
    /// this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    None,
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum LeadingFillArg {
    Error,
    Zero,
}

#[derive(Subcommand)]
enum Command {
    /// Per-ticker descriptive statistics as CSV
    Stats {
        /// Panel CSV (header: date,TICKER1,...)
        #[arg(long)]
        input: PathBuf,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Fill missing values by exponential decay from the last observation
    Impute {
        /// Decay rate (default 0.23)
        #[arg(long)]
        lambda: Option<f64>,
        /// Noise policy: none | gaussian (default gaussian, sigma from an
        /// AR(1) fit per column)
        #[arg(long, value_enum)]
        noise: Option<NoiseArg>,
        /// Master seed (default 0)
        #[arg(long)]
        seed: Option<u64>,
        /// Leading-missing policy: error | zero (default error)
        #[arg(long, value_enum)]
        leading_fill: Option<LeadingFillArg>,
        /// Input panel CSV
        input: PathBuf,
        /// Output panel CSV (same schema, no empty cells)
        output: PathBuf,
    },

    /// Quantile-encode each column to symbols 1..n_states (debug helper)
    Encode {
        /// Complete panel CSV (impute first if needed)
        #[arg(long)]
        input: PathBuf,
        /// States per series (default 3)
        #[arg(long)]
        n_states: Option<usize>,
        /// Output symbol CSV (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Transfer entropy + bootstrap significance for one ordered pair
    /// (debug JSON on stdout)
    Tepair {
        /// Complete panel CSV
        #[arg(long)]
        input: PathBuf,
        /// Source ticker
        #[arg(long)]
        source: String,
        /// Target ticker
        #[arg(long)]
        target: String,
        /// Target history length (default 1)
        #[arg(long)]
        k: Option<usize>,
        /// Source history length (default 1)
        #[arg(long)]
        l: Option<usize>,
        /// States per series (default 3)
        #[arg(long)]
        n_states: Option<usize>,
        /// Bootstrap replicates (default 300)
        #[arg(long)]
        n_boot: Option<usize>,
        /// Master seed (default 0)
        #[arg(long)]
        seed: Option<u64>,
    },

    /// Conditional-entropy lag calibration on simulated AR(1) series
    Calibrate {
        /// Comma-separated sample sizes
        /// (default 100,150,200,500,1000,10000,100000)
        #[arg(long)]
        sizes: Option<String>,
        /// Largest lag (default 6)
        #[arg(long)]
        max_lag: Option<usize>,
        /// AR(1) coefficient (default 0.5)
        #[arg(long)]
        psi1: Option<f64>,
        /// AR(1) noise std dev (default 0.1)
        #[arg(long)]
        sigma: Option<f64>,
        /// AR(1) intercept (default 0)
        #[arg(long)]
        intercept: Option<f64>,
        /// States per series (default 3)
        #[arg(long)]
        n_states: Option<usize>,
        /// Master seed (default 0)
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV `sample_size,lag,ce_bits` (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Rolling-window spillover networks with the full metric suite
    Rolling {
        /// Panel CSV; imputed automatically when cells are missing
        #[arg(long)]
        input: PathBuf,
        /// Artifact directory
        #[arg(long)]
        out: PathBuf,
        /// Window length in observations (default 200)
        #[arg(long)]
        window: Option<usize>,
        /// Step between windows (default 10)
        #[arg(long)]
        step: Option<usize>,
        /// Target history length (default 1)
        #[arg(long)]
        k: Option<usize>,
        /// Source history length (default 1)
        #[arg(long)]
        l: Option<usize>,
        /// States per series (default 3)
        #[arg(long)]
        n_states: Option<usize>,
        /// Significance level (default 0.10)
        #[arg(long)]
        alpha: Option<f64>,
        /// Bootstrap replicates per pair (default 300)
        #[arg(long)]
        n_boot: Option<usize>,
        /// Master seed (default 0)
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated regime break dates (YYYY-MM-DD); adds regime
        /// reports under out/regimes/
        #[arg(long)]
        breaks: Option<String>,
        /// Encode on whole-panel thresholds instead of window-local ones
        #[arg(long)]
        global_thresholds: bool,
        /// Imputation decay rate (default 0.23)
        #[arg(long)]
        lambda: Option<f64>,
        /// Imputation noise policy (default gaussian)
        #[arg(long, value_enum)]
        noise: Option<NoiseArg>,
        /// Leading-missing policy (default error)
        #[arg(long, value_enum)]
        leading_fill: Option<LeadingFillArg>,
    },

    /// Span-wide regime reports (centrality, arborescence, degree
    /// distributions)
    Regimes {
        /// Panel CSV; imputed automatically when cells are missing
        #[arg(long)]
        input: PathBuf,
        /// Artifact directory
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated regime break dates (YYYY-MM-DD)
        #[arg(long)]
        breaks: Option<String>,
        /// Target history length (default 1)
        #[arg(long)]
        k: Option<usize>,
        /// Source history length (default 1)
        #[arg(long)]
        l: Option<usize>,
        /// States per series (default 3)
        #[arg(long)]
        n_states: Option<usize>,
        /// Significance level (default 0.10)
        #[arg(long)]
        alpha: Option<f64>,
        /// Bootstrap replicates per pair (default 300)
        #[arg(long)]
        n_boot: Option<usize>,
        /// Master seed (default 0)
        #[arg(long)]
        seed: Option<u64>,
        /// Imputation decay rate (default 0.23)
        #[arg(long)]
        lambda: Option<f64>,
        /// Imputation noise policy (default gaussian)
        #[arg(long, value_enum)]
        noise: Option<NoiseArg>,
        /// Leading-missing policy (default error)
        #[arg(long, value_enum)]
        leading_fill: Option<LeadingFillArg>,
    },

    /// Per-window Jaccard similarity between two rolling result trees
    Compare {
        /// First results directory (as written by `rolling`)
        #[arg(long)]
        a: PathBuf,
        /// Second results directory
        #[arg(long)]
        b: PathBuf,
        /// Output CSV (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Values an on-disk config file may set; flags override these.
#[derive(Debug, Default, Clone, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    window: Option<usize>,
    step: Option<usize>,
    k: Option<usize>,
    l: Option<usize>,
    n_states: Option<usize>,
    alpha: Option<f64>,
    n_boot: Option<usize>,
    seed: Option<u64>,
    breaks: Option<Vec<NaiveDate>>,
    global_thresholds: Option<bool>,
    lambda: Option<f64>,
    noise: Option<NoisePolicy>,
    leading_fill: Option<LeadingFill>,
    max_lag: Option<usize>,
    psi1: Option<f64>,
    sigma: Option<f64>,
    intercept: Option<f64>,
    sizes: Option<Vec<usize>>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(spillnet::Error),
}

impl From<spillnet::Error> for CliError {
    fn from(e: spillnet::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(e) if e.is_data_error() => 2,
            CliError::Lib(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap routes --help/--version through the error path too
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure {threads} threads: {e}");
            return ExitCode::from(1);
        }
    }

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {} is not JSON: {e}", path.display())))?;
    // A run manifest wraps the effective config under "config".
    let config_value = match value.get("config") {
        Some(inner) if value.get("tool").is_some() => inner.clone(),
        _ => value,
    };
    serde_json::from_value(config_value)
        .map_err(|e| CliError::Usage(format!("config {} invalid: {e}", path.display())))
}

fn parse_breaks(arg: Option<&str>, file: Option<&[NaiveDate]>) -> Result<Vec<NaiveDate>, CliError> {
    if let Some(arg) = arg {
        arg.split(',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
                    .map_err(|_| CliError::Usage(format!("invalid break date {s:?}")))
            })
            .collect()
    } else {
        Ok(file.map(|b| b.to_vec()).unwrap_or_default())
    }
}

fn parse_sizes(arg: Option<&str>, file: Option<&[usize]>) -> Result<Vec<usize>, CliError> {
    if let Some(arg) = arg {
        arg.split(',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("invalid sample size {s:?}")))
            })
            .collect()
    } else if let Some(sizes) = file {
        Ok(sizes.to_vec())
    } else {
        Ok(vec![100, 150, 200, 500, 1000, 10_000, 100_000])
    }
}

fn noise_policy(flag: Option<NoiseArg>, file: Option<NoisePolicy>) -> NoisePolicy {
    match flag {
        Some(NoiseArg::None) => NoisePolicy::None,
        Some(NoiseArg::Gaussian) => NoisePolicy::Gaussian,
        None => file.unwrap_or_default(),
    }
}

fn leading_fill_policy(flag: Option<LeadingFillArg>, file: Option<LeadingFill>) -> LeadingFill {
    match flag {
        Some(LeadingFillArg::Error) => LeadingFill::Error,
        Some(LeadingFillArg::Zero) => LeadingFill::Zero,
        None => file.unwrap_or_default(),
    }
}

fn write_or_stdout(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| {
                    CliError::Lib(spillnet::Error::Io {
                        path: parent.display().to_string(),
                        source: e,
                    })
                })?;
            }
            std::fs::write(path, contents).map_err(|e| {
                CliError::Lib(spillnet::Error::Io {
                    path: path.display().to_string(),
                    source: e,
                })
            })
        }
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// Impute the panel when it has missing cells; pass a complete panel through.
fn ensure_complete(
    panel: SentimentPanel,
    cfg: &PanelImputeConfig,
    recorder: &mut ManifestRecorder,
) -> Result<SentimentPanel, CliError> {
    if panel.is_complete() {
        return Ok(panel);
    }
    let start = Instant::now();
    let (complete, stats) = impute_panel(&panel, cfg)?;
    let filled: usize = stats.iter().map(|s| s.imputed).sum();
    let clamped: usize = stats.iter().map(|s| s.clamped).sum();
    eprintln!(
        "imputed {filled} missing cells ({clamped} clamped) with lambda {}",
        cfg.lambda
    );
    recorder.stage("impute", start.elapsed());
    Ok(complete)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = load_file_config(cli.config.as_deref())?;

    match cli.command {
        Command::Stats { input, out } => {
            let mut recorder = ManifestRecorder::new("stats");
            recorder.input(&input)?;
            let start = Instant::now();
            let panel = load_panel(&input)?;
            recorder.stage("load", start.elapsed());
            let start = Instant::now();
            let stats: Vec<_> = panel
                .tickers
                .iter()
                .zip(&panel.values)
                .map(|(t, col)| {
                    describe(col).map_err(|e| {
                        CliError::Lib(spillnet::Error::Degenerate {
                            what: "descriptive statistics",
                            detail: format!("column {t}: {e}"),
                        })
                    })
                })
                .collect::<Result<_, _>>()?;
            recorder.stage("describe", start.elapsed());
            let csv = export::stats_csv(&panel.tickers, &stats);
            write_or_stdout(out.as_deref(), &csv)?;
            eprintln!(
                "described {} tickers over {} rows",
                panel.n_cols(),
                panel.n_rows()
            );
            recorder.config(serde_json::json!({}));
            recorder.finish_for_file(out.as_deref())?;
            Ok(())
        }

        Command::Impute {
            lambda,
            noise,
            seed,
            leading_fill,
            input,
            output,
        } => {
            let mut recorder = ManifestRecorder::new("impute");
            recorder.input(&input)?;
            let cfg = PanelImputeConfig {
                lambda: lambda.or(file.lambda).unwrap_or(0.23),
                noise: noise_policy(noise, file.noise),
                leading_fill: leading_fill_policy(leading_fill, file.leading_fill),
                master_seed: seed.or(file.seed).unwrap_or(0),
            };
            recorder.config(serde_json::to_value(cfg).unwrap());
            recorder.seed(cfg.master_seed);
            let start = Instant::now();
            let panel = load_panel(&input)?;
            recorder.stage("load", start.elapsed());
            let start = Instant::now();
            let (complete, stats) = impute_panel(&panel, &cfg)?;
            recorder.stage("impute", start.elapsed());
            let filled: usize = stats.iter().map(|s| s.imputed).sum();
            let clamped: usize = stats.iter().map(|s| s.clamped).sum();
            let start = Instant::now();
            complete.save_csv(&output)?;
            recorder.stage("write", start.elapsed());
            eprintln!(
                "filled {filled} cells ({clamped} clamped) across {} columns",
                complete.n_cols()
            );
            recorder.finish_for_file(Some(&output))?;
            Ok(())
        }

        Command::Encode {
            input,
            n_states,
            out,
        } => {
            let mut recorder = ManifestRecorder::new("encode");
            recorder.input(&input)?;
            let n_states = n_states.or(file.n_states).unwrap_or(3);
            recorder.config(serde_json::json!({ "n_states": n_states }));
            let panel = load_panel(&input)?;
            let mut columns = Vec::with_capacity(panel.n_cols());
            for (t, col) in panel.tickers.iter().zip(&panel.values) {
                let values: Vec<f64> = col
                    .iter()
                    .map(|v| {
                        v.ok_or_else(|| {
                            CliError::Lib(spillnet::Error::InvalidParameter {
                                name: "panel",
                                detail: format!("column {t} has missing values; run impute first"),
                            })
                        })
                    })
                    .collect::<Result<_, _>>()?;
                let thresholds = quantile_thresholds(&values, n_states)?;
                if thresholds.collapsed {
                    eprintln!("warning: column {t} has tied quantiles; states merged");
                }
                columns.push(encode(&values, &thresholds));
            }
            let mut csv = String::from("date");
            for t in &panel.tickers {
                csv.push(',');
                csv.push_str(t);
            }
            csv.push('\n');
            for (r, date) in panel.dates.iter().enumerate() {
                csv.push_str(&date.to_string());
                for col in &columns {
                    csv.push_str(&format!(",{}", col.symbols[r]));
                }
                csv.push('\n');
            }
            write_or_stdout(out.as_deref(), &csv)?;
            recorder.finish_for_file(out.as_deref())?;
            Ok(())
        }

        Command::Tepair {
            input,
            source,
            target,
            k,
            l,
            n_states,
            n_boot,
            seed,
        } => {
            let panel = load_panel(&input)?;
            let k = k.or(file.k).unwrap_or(1);
            let l = l.or(file.l).unwrap_or(1);
            let n_states = n_states.or(file.n_states).unwrap_or(3);
            let n_boot = n_boot.or(file.n_boot).unwrap_or(300);
            let seed = seed.or(file.seed).unwrap_or(0);

            let position = |name: &str| -> Result<usize, CliError> {
                panel
                    .tickers
                    .iter()
                    .position(|t| t == name)
                    .ok_or_else(|| CliError::Usage(format!("ticker {name} not in the panel")))
            };
            let src_idx = position(&source)?;
            let dst_idx = position(&target)?;
            let column = |idx: usize| -> Result<Vec<f64>, CliError> {
                panel.values[idx]
                    .iter()
                    .map(|v| {
                        v.ok_or_else(|| {
                            CliError::Lib(spillnet::Error::InvalidParameter {
                                name: "panel",
                                detail: format!(
                                    "column {} has missing values; run impute first",
                                    panel.tickers[idx]
                                ),
                            })
                        })
                    })
                    .collect()
            };
            let src_values = column(src_idx)?;
            let dst_values = column(dst_idx)?;
            let src = encode(&src_values, &quantile_thresholds(&src_values, n_states)?);
            let dst = encode(&dst_values, &quantile_thresholds(&dst_values, n_states)?);
            let mut rng = spillnet::rng::stream(
                seed,
                spillnet::rng::StreamDomain::Pair,
                0,
                spillnet::rng::pair_coord(src_idx, dst_idx),
            );
            let (estimate, significance) = te_pvalue(&src, &dst, k, l, n_boot, &mut rng)?;
            let json = serde_json::json!({
                "source": source,
                "target": target,
                "estimate": estimate,
                "significance": significance,
            });
            println!("{}", serde_json::to_string_pretty(&json).unwrap());
            Ok(())
        }

        Command::Calibrate {
            sizes,
            max_lag,
            psi1,
            sigma,
            intercept,
            n_states,
            seed,
            out,
        } => {
            let mut recorder = ManifestRecorder::new("calibrate");
            let sizes = parse_sizes(sizes.as_deref(), file.sizes.as_deref())?;
            let max_lag = max_lag.or(file.max_lag).unwrap_or(6);
            let n_states = n_states.or(file.n_states).unwrap_or(3);
            let ar = ArParams {
                intercept: intercept.or(file.intercept).unwrap_or(0.0),
                psi1: psi1.or(file.psi1).unwrap_or(0.5),
                sigma: sigma.or(file.sigma).unwrap_or(0.1),
            };
            let seed = seed.or(file.seed).unwrap_or(0);
            recorder.config(serde_json::json!({
                "sizes": sizes, "max_lag": max_lag, "n_states": n_states,
                "psi1": ar.psi1, "sigma": ar.sigma, "intercept": ar.intercept,
            }));
            recorder.seed(seed);
            let start = Instant::now();
            let cal = calibrate_lags(&sizes, max_lag, n_states, ar, seed)?;
            recorder.stage("calibrate", start.elapsed());
            let mut csv = String::from("sample_size,lag,ce_bits\n");
            for (i, n) in cal.sample_sizes.iter().enumerate() {
                for (j, lag) in cal.lags.iter().enumerate() {
                    csv.push_str(&format!("{n},{lag},{}\n", cal.ce_surface[i][j]));
                }
            }
            write_or_stdout(out.as_deref(), &csv)?;
            eprintln!("recommended lag: {}", cal.recommended_lag);
            recorder.finish_for_file(out.as_deref())?;
            Ok(())
        }

        Command::Rolling {
            input,
            out,
            window,
            step,
            k,
            l,
            n_states,
            alpha,
            n_boot,
            seed,
            breaks,
            global_thresholds,
            lambda,
            noise,
            leading_fill,
        } => {
            let mut recorder = ManifestRecorder::new("rolling");
            recorder.input(&input)?;
            let cfg = PipelineConfig {
                window_length: window.or(file.window).unwrap_or(200),
                step: step.or(file.step).unwrap_or(10),
                k: k.or(file.k).unwrap_or(1),
                l: l.or(file.l).unwrap_or(1),
                n_states: n_states.or(file.n_states).unwrap_or(3),
                alpha: alpha.or(file.alpha).unwrap_or(0.10),
                n_boot: n_boot.or(file.n_boot).unwrap_or(300),
                master_seed: seed.or(file.seed).unwrap_or(0),
                regime_breaks: parse_breaks(breaks.as_deref(), file.breaks.as_deref())?,
                global_thresholds: global_thresholds || file.global_thresholds.unwrap_or(false),
            };
            cfg.validate()?;
            let impute_cfg = PanelImputeConfig {
                lambda: lambda.or(file.lambda).unwrap_or(0.23),
                noise: noise_policy(noise, file.noise),
                leading_fill: leading_fill_policy(leading_fill, file.leading_fill),
                master_seed: cfg.master_seed,
            };
            recorder.config(rolling_config_json(&cfg, &impute_cfg));
            recorder.seed(cfg.master_seed);

            let start = Instant::now();
            let panel = load_panel(&input)?;
            recorder.stage("load", start.elapsed());
            let panel = ensure_complete(panel, &impute_cfg, &mut recorder)?;

            let start = Instant::now();
            let rolling = run_rolling(&panel, &cfg)?;
            recorder.stage("estimate", start.elapsed());
            eprintln!(
                "estimated {} windows x {} ordered pairs",
                rolling.networks.len(),
                rolling.networks[0].n() * (rolling.networks[0].n() - 1)
            );

            let start = Instant::now();
            export::write_rolling_artifacts(&out, &rolling)?;
            if !cfg.regime_breaks.is_empty() {
                let reports = regime_report(&panel, &cfg)?;
                for report in &reports {
                    export::write_regime_artifacts(
                        &out.join("regimes").join(report.index.to_string()),
                        report,
                    )?;
                }
                eprintln!("wrote {} regime reports", cfg.regime_breaks.len() + 1);
            }
            recorder.stage("write", start.elapsed());
            recorder.finish_in_dir(&out)?;
            Ok(())
        }

        Command::Regimes {
            input,
            out,
            breaks,
            k,
            l,
            n_states,
            alpha,
            n_boot,
            seed,
            lambda,
            noise,
            leading_fill,
        } => {
            let mut recorder = ManifestRecorder::new("regimes");
            recorder.input(&input)?;
            let regime_breaks = parse_breaks(breaks.as_deref(), file.breaks.as_deref())?;
            if regime_breaks.is_empty() {
                eprintln!("note: no --breaks given; reporting a single whole-span regime");
            }
            let cfg = PipelineConfig {
                k: k.or(file.k).unwrap_or(1),
                l: l.or(file.l).unwrap_or(1),
                n_states: n_states.or(file.n_states).unwrap_or(3),
                alpha: alpha.or(file.alpha).unwrap_or(0.10),
                n_boot: n_boot.or(file.n_boot).unwrap_or(300),
                master_seed: seed.or(file.seed).unwrap_or(0),
                regime_breaks,
                ..PipelineConfig::default()
            };
            cfg.validate()?;
            let impute_cfg = PanelImputeConfig {
                lambda: lambda.or(file.lambda).unwrap_or(0.23),
                noise: noise_policy(noise, file.noise),
                leading_fill: leading_fill_policy(leading_fill, file.leading_fill),
                master_seed: cfg.master_seed,
            };
            recorder.config(rolling_config_json(&cfg, &impute_cfg));
            recorder.seed(cfg.master_seed);

            let start = Instant::now();
            let panel = load_panel(&input)?;
            recorder.stage("load", start.elapsed());
            let panel = ensure_complete(panel, &impute_cfg, &mut recorder)?;

            let start = Instant::now();
            let reports = regime_report(&panel, &cfg)?;
            recorder.stage("estimate", start.elapsed());
            let start = Instant::now();
            for report in &reports {
                export::write_regime_artifacts(
                    &out.join("regimes").join(report.index.to_string()),
                    report,
                )?;
                eprintln!(
                    "regime {}: {} .. {} ({} obs), root {}",
                    report.index,
                    report.start_date,
                    report.end_date,
                    report.n_obs,
                    report.arborescence.root_label()
                );
            }
            recorder.stage("write", start.elapsed());
            recorder.finish_in_dir(&out)?;
            Ok(())
        }

        Command::Compare { a, b, out } => {
            let mut recorder = ManifestRecorder::new("compare");
            let start = Instant::now();
            let nets_a = export::read_run_networks(&a)?;
            let nets_b = export::read_run_networks(&b)?;
            recorder.stage("load", start.elapsed());
            let sims = spillnet::pipeline::cross_run_jaccard(&nets_a, &nets_b)?;
            let end_dates: Vec<NaiveDate> = nets_a
                .iter()
                .map(|n| {
                    n.window.map(|w| w.end).ok_or_else(|| {
                        CliError::Lib(spillnet::Error::Parse {
                            location: a.display().to_string(),
                            message: "network JSON lacks window metadata".into(),
                        })
                    })
                })
                .collect::<Result<_, _>>()?;
            let csv = export::cross_jaccard_csv(&end_dates, &sims);
            write_or_stdout(out.as_deref(), &csv)?;
            eprintln!("compared {} windows", sims.len());
            recorder.config(serde_json::json!({
                "a": a.display().to_string(),
                "b": b.display().to_string(),
            }));
            recorder.finish_for_file(out.as_deref())?;
            Ok(())
        }
    }
}

fn rolling_config_json(cfg: &PipelineConfig, impute: &PanelImputeConfig) -> serde_json::Value {
    serde_json::json!({
        "window": cfg.window_length,
        "step": cfg.step,
        "k": cfg.k,
        "l": cfg.l,
        "n_states": cfg.n_states,
        "alpha": cfg.alpha,
        "n_boot": cfg.n_boot,
        "seed": cfg.master_seed,
        "breaks": cfg.regime_breaks,
        "global_thresholds": cfg.global_thresholds,
        "lambda": impute.lambda,
        "noise": impute.noise,
        "leading_fill": impute.leading_fill,
    })
}
