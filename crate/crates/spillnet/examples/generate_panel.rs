//! Generate a synthetic sentiment panel CSV to feed the CLI.
//!
//! ```text
//! cargo run -p spillnet --example generate_panel -- panel.csv \
//!     [--rows 1319] [--cols 34] [--seed 7] \
//!     [--missing-low 0.0076] [--missing-high 0.25] [--hub]
//! ```
//!
//! With `--hub` the first column drives five others with one day's lag
//! (ground truth for influencer checks); `--cols` then counts the extra
//! noise columns.

use spillnet::synthetic::{hub_panel, random_panel, HubPanelSpec, RandomPanelSpec};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut out = None;
    let mut rows = 1319usize;
    let mut cols = 34usize;
    let mut seed = 7u64;
    let mut missing_low = 0.0076f64;
    let mut missing_high = 0.25f64;
    let mut hub = false;

    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut value = |name: &str| {
            it.next()
                .unwrap_or_else(|| panic!("{name} needs a value"))
                .clone()
        };
        match arg.as_str() {
            "--rows" => rows = value("--rows").parse().expect("--rows"),
            "--cols" => cols = value("--cols").parse().expect("--cols"),
            "--seed" => seed = value("--seed").parse().expect("--seed"),
            "--missing-low" => missing_low = value("--missing-low").parse().expect("--missing-low"),
            "--missing-high" => {
                missing_high = value("--missing-high").parse().expect("--missing-high")
            }
            "--hub" => hub = true,
            other if out.is_none() && !other.starts_with("--") => {
                out = Some(other.to_string());
            }
            other => panic!("unexpected argument {other}"),
        }
    }
    let out = out.expect("usage: generate_panel OUT.csv [--rows N] [--cols N] [--seed S] [--hub]");

    let panel = if hub {
        hub_panel(&HubPanelSpec {
            rows,
            n_driven: 5,
            n_noise: cols,
            coupling: 0.8,
            noise_sd: 0.08,
            seed,
        })
    } else {
        random_panel(&RandomPanelSpec {
            rows,
            cols,
            missing_low,
            missing_high,
            seed,
        })
    };
    panel.save_csv(&out).expect("write panel");
    eprintln!(
        "wrote {} rows x {} columns to {out}",
        panel.n_rows(),
        panel.n_cols()
    );
}
