//! Run configuration: defaults, then a TOML file, then command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fts_bands::bootstrap::{BootstrapConfig, QuantileConvention};
use fts_bands::lrv::LrvConfig;
use fts_bands::pipeline::PipelineConfig;
use fts_bands::segmentation::{RelevanceMode, RelevantChangeConfig, SegmentationConfig};
use fts_bands::Tuning;

use crate::error::{CliError, Result};
use crate::ingest::Layout;

pub const DEFAULT_GRID_SIZE: usize = 100;

/// Bootstrap settings of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapSection {
    /// Block length `L`, or `"auto"` for `⌊n̂_min^{1/3}⌋`.
    pub block_length: Tuning<usize>,
    /// Number of bootstrap replicates `R`.
    pub replications: usize,
    pub seed: u64,
    /// `half_alpha` (bands use `q*_{1−α/2}`) or `full_alpha` (`q*_{1−α}`).
    pub convention: QuantileConvention,
}

impl Default for BootstrapSection {
    fn default() -> Self {
        let b = BootstrapConfig::default();
        BootstrapSection {
            block_length: b.block_length,
            replications: b.replications,
            seed: b.seed,
            convention: b.convention,
        }
    }
}

/// Everything `analyze` needs. Every field has a default; see [`RunConfig::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Cycle table to read (required for `analyze`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Directory receiving `changepoints.csv`, `bands.csv` and `diagnostics.toml`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub layout: Layout,
    /// Number of phase grid points `T` (default 100).
    pub grid_size: usize,
    /// Band level: bands hold simultaneously with probability about `1 − α` (default 0.1).
    pub alpha: f64,
    /// Level of the bootstrap-calibrated relevance filter (default 0.05; unused by the plug-in filter).
    pub beta: f64,
    /// Relevant jump size `Δ` in data units, or `"auto"`.
    pub delta: Tuning<f64>,
    /// `plug_in` (jump > Δ) or `bootstrap` (jump > Δ + bootstrap margin).
    pub relevance_mode: RelevanceMode,
    pub bootstrap: BootstrapSection,
    pub lrv: LrvConfig,
    pub segmentation: SegmentationConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let relevance = RelevantChangeConfig::default();
        RunConfig {
            input: None,
            output: None,
            layout: Layout::Auto,
            grid_size: DEFAULT_GRID_SIZE,
            alpha: BootstrapConfig::default().alpha,
            beta: relevance.beta,
            delta: relevance.delta,
            relevance_mode: relevance.mode,
            bootstrap: BootstrapSection::default(),
            lrv: LrvConfig::default(),
            segmentation: SegmentationConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes to TOML")
    }

    /// Checks levels and sizes; paths are checked by the commands that need them.
    pub fn validate(&self) -> Result<()> {
        let level = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(CliError::invalid(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        level("alpha", self.alpha)?;
        level("beta", self.beta)?;
        if self.grid_size == 0 {
            return Err(CliError::invalid("grid_size must be at least 1"));
        }
        if let Tuning::Fixed(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(CliError::invalid(format!("delta must be positive, got {d}")));
            }
        }
        if self.bootstrap.replications == 0 {
            return Err(CliError::invalid("bootstrap.replications must be at least 1"));
        }
        if self.bootstrap.block_length == Tuning::Fixed(0) {
            return Err(CliError::invalid("bootstrap.block_length must be at least 1"));
        }
        if self.lrv.bandwidth == Tuning::Fixed(0) {
            return Err(CliError::invalid("lrv.bandwidth must be at least 1"));
        }
        if let Tuning::Fixed(xi) = self.segmentation.threshold {
            if !(xi > 0.0 && xi.is_finite()) {
                return Err(CliError::invalid(format!("segmentation.threshold must be positive, got {xi}")));
            }
        }
        if matches!(self.segmentation.min_segment_length, Tuning::Fixed(m) if m < 2) {
            return Err(CliError::invalid("segmentation.min_segment_length must be at least 2"));
        }
        for (name, p) in [("input", &self.input), ("output", &self.output)] {
            if p.as_ref().is_some_and(|p| p.as_os_str().is_empty()) {
                return Err(CliError::invalid(format!("{name} path is empty")));
            }
        }
        Ok(())
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            segmentation: self.segmentation,
            relevance: RelevantChangeConfig {
                delta: self.delta,
                beta: self.beta,
                mode: self.relevance_mode,
                calibration_seed: fts_bands::rng::derive_seed(self.bootstrap.seed, 1),
                ..Default::default()
            },
            lrv: self.lrv,
            bootstrap: BootstrapConfig {
                block_length: self.bootstrap.block_length,
                replications: self.bootstrap.replications,
                alpha: self.alpha,
                seed: self.bootstrap.seed,
                convention: self.bootstrap.convention,
            },
            quantile_override: None,
        }
    }
}
