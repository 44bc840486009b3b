//! Flag parsing, config-file merging and the resolved run configuration
//! embedded in every output.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const FORMAT: &str = "recordlab-run/1";

/// Every option a command may take. Unset fields fall back to the config
/// file, then to command defaults.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct Flags {
    /// Mean of the per-step log-increment.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,

    /// Standard deviation of the per-step log-increment.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,

    /// Series length N.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,

    /// Number of realizations.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,

    /// Master seed; generated and reported when absent.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Initial value of simulated series.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,

    /// Window length for block maxima.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins_per_decade: Option<usize>,

    /// Smallest age in power-law fits.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_min: Option<u64>,

    /// Largest age in power-law fits; defaults to a tenth of the longest
    /// series.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_max: Option<u64>,

    /// Count the open age of the final record in age distributions and
    /// longest-age statistics.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_censored: Option<bool>,

    /// Use the plain close column instead of the adjusted close.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub close: Option<bool>,

    /// Bootstrap resamples for the GEV shape interval (0 skips it).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_boot: Option<usize>,

    /// Largest lag of the record-age autocorrelation.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<usize>,

    /// Comma-separated series lengths for the scaling study.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,

    /// Rows with N above this enter the logarithmic fits.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<usize>,

    /// Directory of daily price CSV files.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,

    /// Output directory.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Resolved configuration written into outputs. Feeding it back through
/// `--config` reproduces the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Embedded {
    pub format: String,
    pub command: String,
    #[serde(flatten)]
    pub flags: Flags,
}

impl Embedded {
    pub fn new(command: &str, flags: Flags) -> Self {
        Self {
            format: FORMAT.into(),
            command: command.into(),
            flags,
        }
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// Single-line form for TSV headers.
    pub fn comment_line(&self) -> String {
        format!("# recordlab {}\n", serde_json::to_string(self).expect("config serializes"))
    }
}

/// Loads a config file. Accepts a bare flag object or any output document
/// carrying one under `"config"`.
fn load(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut value: Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    if !value.is_object() {
        bail!("config {} is not a JSON object", path.display());
    }
    Ok(value)
}

/// Flags given on the command line override those from the config file.
pub fn merge(config: Option<&Path>, flags: &Flags) -> Result<Flags> {
    let mut base = match config {
        Some(p) => load(p)?,
        None => Value::Object(Default::default()),
    };
    let overlay = serde_json::to_value(flags)?;
    if let (Some(b), Value::Object(o)) = (base.as_object_mut(), overlay) {
        b.remove("format");
        b.remove("command");
        for (k, v) in o {
            b.insert(k, v);
        }
    }
    serde_json::from_value(base).context("invalid configuration")
}

pub fn threads() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var("RECORDLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(cap) if cap >= 1 => cap,
        _ => available,
    }
}
