//! Command-line grammar. Flags mirror [`RunConfig`] fields and override a config file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use fts_bands::bootstrap::QuantileConvention;
use fts_bands::lrv::Kernel;
use fts_bands::segmentation::RelevanceMode;
use fts_bands::Tuning;

use crate::config::RunConfig;
use crate::error::Result;
use crate::ingest::Layout;

#[derive(Debug, Parser)]
#[command(name = "ftsbands", version, about = "Relevant change points and simultaneous confidence bands for cycle data")]
pub struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment a cycle table and write change points, bands and diagnostics.
    Analyze(AnalyzeArgs),
    /// Draw a synthetic data set and its ground truth from a scenario file.
    Simulate(SimulateArgs),
    /// Monte Carlo coverage of the bands on a scenario.
    Coverage(CoverageArgs),
    /// Print version and RNG information.
    Version,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// TOML run configuration; flags override its values.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Cycle table (matrix or long layout).
    #[arg(short, long)]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub layout: Option<Layout>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario TOML file.
    #[arg(short, long)]
    pub scenario: PathBuf,
    /// Output directory for data.csv, truth_means.csv and truth.toml.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Replaces the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    /// Scenario TOML file.
    #[arg(short, long)]
    pub scenario: PathBuf,
    /// TOML run configuration for the pipeline (input and output are ignored).
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Number of Monte Carlo replications `M`.
    #[arg(short = 'm', long, default_value_t = 100)]
    pub monte_carlo: usize,
    /// Replaces the scenario seed.
    #[arg(long)]
    pub scenario_seed: Option<u64>,
    /// Directory for coverage.csv and coverage.toml; summary only when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

fn relevance_mode(s: &str) -> std::result::Result<RelevanceMode, String> {
    match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
        "plug_in" | "plugin" => Ok(RelevanceMode::PlugIn),
        "bootstrap" => Ok(RelevanceMode::Bootstrap),
        other => Err(format!("unknown relevance mode {other:?} (plug_in, bootstrap)")),
    }
}

/// Pipeline settings shared by `analyze` and `coverage`.
#[derive(Debug, Args, Default)]
pub struct PipelineArgs {
    /// Phase grid size T [default: 100].
    #[arg(short = 't', long)]
    pub grid_size: Option<usize>,
    /// Band level alpha [default: 0.1].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Relevance test level beta [default: 0.05].
    #[arg(long)]
    pub beta: Option<f64>,
    /// Relevant jump size, or "auto" [default: auto].
    #[arg(long)]
    pub delta: Option<Tuning<f64>>,
    /// plug_in or bootstrap [default: plug_in].
    #[arg(long, value_parser = relevance_mode)]
    pub relevance_mode: Option<RelevanceMode>,
    /// Bootstrap block length, or "auto" [default: auto].
    #[arg(long)]
    pub block_length: Option<Tuning<usize>>,
    /// Bootstrap replications R [default: 2000].
    #[arg(long)]
    pub replications: Option<usize>,
    /// Bootstrap seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// half_alpha or full_alpha [default: half_alpha].
    #[arg(long)]
    pub quantile_convention: Option<QuantileConvention>,
    /// bartlett, parzen or flat_top [default: flat_top].
    #[arg(long)]
    pub kernel: Option<Kernel>,
    /// Long-run variance bandwidth, or "auto" [default: auto].
    #[arg(long)]
    pub bandwidth: Option<Tuning<usize>>,
    /// CUSUM threshold, or "auto" [default: auto].
    #[arg(long)]
    pub threshold: Option<Tuning<f64>>,
    /// Minimum cycles per segment, or "auto" [default: auto].
    #[arg(long)]
    pub min_segment_length: Option<Tuning<usize>>,
    /// Maximum number of change points [default: 32].
    #[arg(long)]
    pub max_changes: Option<usize>,
}

impl PipelineArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($flag:ident => $($field:ident).+) => {
                if let Some(v) = self.$flag {
                    cfg.$($field).+ = v;
                }
            };
        }
        set!(grid_size => grid_size);
        set!(alpha => alpha);
        set!(beta => beta);
        set!(delta => delta);
        set!(relevance_mode => relevance_mode);
        set!(block_length => bootstrap.block_length);
        set!(replications => bootstrap.replications);
        set!(seed => bootstrap.seed);
        set!(quantile_convention => bootstrap.convention);
        set!(kernel => lrv.kernel);
        set!(bandwidth => lrv.bandwidth);
        set!(threshold => segmentation.threshold);
        set!(min_segment_length => segmentation.min_segment_length);
        set!(max_changes => segmentation.max_changes);
    }
}

impl AnalyzeArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.input {
            cfg.input = Some(p.clone());
        }
        if let Some(p) = &self.output {
            cfg.output = Some(p.clone());
        }
        if let Some(l) = self.layout {
            cfg.layout = l;
        }
        self.pipeline.apply(&mut cfg);
        Ok(cfg)
    }
}

impl CoverageArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        self.pipeline.apply(&mut cfg);
        Ok(cfg)
    }
}
