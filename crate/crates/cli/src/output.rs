//! File formats: CSV tables and the per-point run manifest.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::RawConfig;

pub const MANIFEST: &str = "manifest.toml";
pub const AGGREGATE: &str = "aggregate.csv";
pub const EXACT_DIAG: &str = "exact_diag.csv";

/// Autocorrelation and blocking conventions recorded in every manifest.
pub const TAU_RULE: &str =
    "tau_int = 1/2 + sum of rho(t) for t = 1..W, W the first lag with rho(W) <= 0 (included)";
pub const BLOCKING_RULE: &str =
    "d = ceil(2 max tau_int); discard 10 d; blocks of 10 d; error = std(stream means) / sqrt(n_stream)";

/// 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// File-name-safe form of an observable name.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamRecord {
    pub id: usize,
    /// Hexadecimal, since TOML integers are signed.
    pub seed: String,
    pub file: String,
    pub cluster_proposed: u64,
    pub cluster_accepted: u64,
    pub cluster_acceptance: f64,
    pub single_site_proposed: u64,
    pub single_site_accepted: u64,
    pub single_site_acceptance: f64,
}

/// The `[run]` table of a manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunInfo {
    pub mode: String,
    pub version: String,
    pub fingerprint: String,
    pub a_dig: f64,
    pub m_squared: f64,
    pub points: usize,
    pub cutoff: f64,
    pub n_bosons: usize,
    pub beta: f64,
    pub delta: f64,
    pub slices: usize,
    pub b_max: usize,
    pub total_sweeps: usize,
    pub tau_rule: String,
    pub blocking_rule: String,
    pub streams: Vec<StreamRecord>,
}

#[derive(Serialize)]
struct ManifestOut<'a> {
    run: &'a RunInfo,
    #[serde(flatten)]
    config: &'a RawConfig,
}

pub fn write_manifest(dir: &Path, config: &RawConfig, run: &RunInfo) -> Result<()> {
    let text = toml::to_string(&ManifestOut { run, config }).context("serializing manifest")?;
    let path = dir.join(MANIFEST);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

/// Reads a manifest back as the configuration echo plus its run table.
pub fn read_manifest(dir: &Path) -> Result<(RawConfig, RunInfo)> {
    let path = dir.join(MANIFEST);
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut config =
        RawConfig::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?;
    let run = config
        .run
        .take()
        .with_context(|| format!("{} has no [run] table", path.display()))?;
    let run: RunInfo = toml::Value::Table(run)
        .try_into()
        .with_context(|| format!("[run] table of {}", path.display()))?;
    Ok((config, run))
}
