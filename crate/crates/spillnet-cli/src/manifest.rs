//! Run manifests: config snapshot, input digests, seed, per-stage timings.
//!
//! Written atomically (temp file + rename) at the end of every
//! artifact-producing run so a results tree always says exactly how it was
//! made. The embedded `config` object can be fed back through `--config` to
//! reproduce the run.

use std::path::Path;
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(serde::Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(serde::Serialize)]
struct StageTiming {
    stage: String,
    ms: u128,
}

#[derive(serde::Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    config: serde_json::Value,
    inputs: Vec<InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    master_seed: Option<u64>,
    timings: Vec<StageTiming>,
}

/// Accumulates manifest fields while a command runs.
pub struct ManifestRecorder {
    manifest: RunManifest,
}

impl ManifestRecorder {
    pub fn new(subcommand: &'static str) -> Self {
        Self {
            manifest: RunManifest {
                tool: "spillnet",
                version: env!("CARGO_PKG_VERSION"),
                subcommand,
                config: serde_json::Value::Null,
                inputs: Vec::new(),
                master_seed: None,
                timings: Vec::new(),
            },
        }
    }

    /// Digest one input file.
    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = std::fs::read(path).map_err(|e| {
            CliError::Lib(spillnet::Error::Io {
                path: path.display().to_string(),
                source: e,
            })
        })?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.manifest.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex,
        });
        Ok(())
    }

    pub fn config(&mut self, config: serde_json::Value) {
        self.manifest.config = config;
    }

    pub fn seed(&mut self, seed: u64) {
        self.manifest.master_seed = Some(seed);
    }

    pub fn stage(&mut self, stage: &str, elapsed: Duration) {
        self.manifest.timings.push(StageTiming {
            stage: stage.to_string(),
            ms: elapsed.as_millis(),
        });
    }

    fn write(&self, path: &Path) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(&self.manifest)
            .expect("manifest serialization cannot fail");
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| {
                CliError::Lib(spillnet::Error::Io {
                    path: parent.display().to_string(),
                    source: e,
                })
            })?;
        }
        let tmp = path.with_extension("json.tmp");
        let io_err = |p: &Path, e: std::io::Error| {
            CliError::Lib(spillnet::Error::Io {
                path: p.display().to_string(),
                source: e,
            })
        };
        std::fs::write(&tmp, json).map_err(|e| io_err(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))?;
        Ok(())
    }

    /// Manifest for a directory-producing run: `<dir>/run_manifest.json`.
    pub fn finish_in_dir(self, dir: &Path) -> Result<(), CliError> {
        self.write(&dir.join("run_manifest.json"))
    }

    /// Manifest for a single-file output: `<file>.manifest.json`. Streaming
    /// runs (stdout) leave no manifest because there is no durable artifact
    /// for it to describe.
    pub fn finish_for_file(self, out: Option<&Path>) -> Result<(), CliError> {
        match out {
            Some(path) => {
                let mut name = path.file_name().unwrap_or_default().to_os_string();
                name.push(".manifest.json");
                self.write(&path.with_file_name(name))
            }
            None => Ok(()),
        }
    }
}
