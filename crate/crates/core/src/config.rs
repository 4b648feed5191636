//! TOML run configuration shared by every subcommand.
//!
//! ```toml
//! [model]
//! n = 2000
//! d = 1
//! seed = 7
//!
//! [kernel_in]
//! kind = "indicator"
//! r = 0.08
//!
//! [kernel_out]
//! kind = "indicator"
//! r = 0.02
//!
//! [run]
//! algorithm = "hosc"
//! out = "out"
//!
//! [sweep]
//! preset = "fig3"
//! seeds = [0, 1, 2]
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::harness::presets::{Preset, PresetOverrides};
use crate::kernels::KernelConfig;
use crate::model::SgbmParams;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n: usize,
    #[serde(default = "default_dim")]
    pub d: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_dim() -> usize {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// `hosc` or `hosc_li` for `cluster`.
    pub algorithm: Option<String>,
    /// Edge list to cluster instead of sampling from `[model]`.
    pub graph: Option<PathBuf>,
    /// Truth labelling used to report accuracy.
    pub labels: Option<PathBuf>,
    /// Output directory; `--out` takes precedence.
    pub out: Option<PathBuf>,
    /// Edge densities for `cluster` when no kernels are given.
    pub mu_in: Option<f64>,
    pub mu_out: Option<f64>,
    /// Lattice cutoff for `spectrum`.
    pub cutoff: Option<i64>,
    /// Bulk threshold on `|λ/n|` for `spectrum`.
    pub threshold: Option<f64>,
    /// Allowed distance to the nearest atom for `spectrum`.
    pub window: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub preset: String,
    pub n: Option<Vec<usize>>,
    pub seeds: Option<Vec<u64>>,
    /// Values of the swept kernel parameter.
    pub grid: Option<Vec<f64>>,
    #[serde(default)]
    pub keep_labels: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: Option<ModelSection>,
    pub kernel_in: Option<KernelConfig>,
    pub kernel_out: Option<KernelConfig>,
    #[serde(default)]
    pub run: RunSection,
    pub sweep: Option<SweepSection>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

pub const DEFAULT_CUTOFF: i64 = 200;
pub const DEFAULT_THRESHOLD: f64 = 0.02;
pub const DEFAULT_WINDOW: f64 = 0.02;

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Config::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Output directory: the override if given, else `run.out`, else `out`.
    pub fn out_dir(&self, cli_override: Option<&Path>) -> PathBuf {
        match (cli_override, &self.run.out) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) => self.resolve(p),
            (None, None) => PathBuf::from("out"),
        }
    }

    /// Full model description; every problem is reported as a config error.
    pub fn params(&self, seed_override: Option<u64>) -> Result<SgbmParams> {
        let model = self.model.as_ref().ok_or_else(|| Error::Config("missing [model] section".into()))?;
        let f_in = self.kernel_in.as_ref().ok_or_else(|| Error::Config("missing [kernel_in] section".into()))?;
        let f_out = self.kernel_out.as_ref().ok_or_else(|| Error::Config("missing [kernel_out] section".into()))?;
        let f_in = f_in.into_kernel(model.d).map_err(|e| prefix("kernel_in", e))?;
        let f_out = f_out.into_kernel(model.d).map_err(|e| prefix("kernel_out", e))?;
        SgbmParams::new(model.n, f_in, f_out, seed_override.unwrap_or(model.seed)).map_err(|e| Error::Config(e.to_string()))
    }

    /// `(μ_in, μ_out)` from `run.mu_*` if both are set, else from the kernels.
    pub fn densities(&self) -> Result<(f64, f64)> {
        match (self.run.mu_in, self.run.mu_out) {
            (Some(a), Some(b)) => Ok((a, b)),
            (None, None) => self.params(None)?.densities(),
            _ => Err(Error::Config("run.mu_in and run.mu_out must be given together".into())),
        }
    }

    pub fn preset(&self, seed_override: Option<u64>) -> Result<(Preset, PresetOverrides)> {
        let sweep = self.sweep.as_ref().ok_or_else(|| Error::Config("missing [sweep] section".into()))?;
        let preset: Preset = sweep.preset.parse()?;
        let overrides = PresetOverrides {
            ns: sweep.n.clone(),
            seeds: sweep.seeds.clone(),
            axis: sweep.grid.clone(),
            master_seed: seed_override.or(self.model.as_ref().map(|m| m.seed)),
            keep_labels: sweep.keep_labels,
        };
        Ok((preset, overrides))
    }
}

fn prefix(section: &str, e: Error) -> Error {
    match e {
        Error::Config(msg) => Error::Config(format!("[{section}] {msg}")),
        other => Error::Config(format!("[{section}] {other}")),
    }
}
