//! The `analyze`, `simulate` and `coverage` verbs.

use std::path::{Path, PathBuf};

use serde::Serialize;

use fts_bands::pipeline::{analyze as run_pipeline, Analysis};
use fts_bands::simulate::{generate, run_coverage_study, CoverageReport, ScenarioSpec};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::format::{number, round_sig};
use crate::ingest::{ingest, Ingested};
use crate::output::{self, create_dir, write_table, write_text, Artifacts};

pub struct AnalyzeOutcome {
    pub data: Ingested,
    pub analysis: Analysis,
    pub artifacts: Artifacts,
}

pub fn analyze(cfg: &RunConfig) -> Result<AnalyzeOutcome> {
    cfg.validate()?;
    let input = cfg.input.as_deref().ok_or_else(|| CliError::invalid("no input file given (--input or `input` in the config)"))?;
    let out = cfg.output.as_deref().ok_or_else(|| CliError::invalid("no output directory given (--output or `output` in the config)"))?;
    let data = ingest(input, cfg.grid_size, cfg.layout)?;
    log::info!("read {} cycles on {} grid points ({} layout)", data.series.len(), data.series.grid_len(), data.layout.name());
    let analysis = run_pipeline(&data.series, &cfg.pipeline())?;
    for w in analysis.warnings() {
        log::warn!("{w}");
    }
    let artifacts = output::write_analysis(out, cfg, &data, &analysis)?;
    Ok(AnalyzeOutcome { data, analysis, artifacts })
}

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

#[derive(Debug, Serialize)]
struct TruthFile<'a> {
    version: &'static str,
    change_cycles: &'a [usize],
    locations: Vec<f64>,
    jump_sizes: Vec<f64>,
    long_run_variance_min: f64,
    long_run_variance_max: f64,
    scenario: &'a ScenarioSpec,
}

pub const DATA_FILE: &str = "data.csv";
pub const TRUTH_MEANS_FILE: &str = "truth_means.csv";
pub const TRUTH_FILE: &str = "truth.toml";

/// Writes `data.csv` (matrix layout), `truth_means.csv` and `truth.toml`.
///
/// Data values are written in shortest round-trip form so that analysing the
/// file sees exactly the generated series.
pub fn simulate(spec: &ScenarioSpec, dir: &Path) -> Result<Vec<PathBuf>> {
    let (x, truth) = generate(spec)?;
    create_dir(dir)?;
    let data_path = dir.join(DATA_FILE);
    let text: String = x
        .rows()
        .map(|row| {
            let mut line = row.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",");
            line.push('\n');
            line
        })
        .collect();
    write_text(&data_path, &text)?;

    let means_path = dir.join(TRUTH_MEANS_FILE);
    let rows = truth.means.iter().enumerate().flat_map(|(i, m)| {
        m.grid()
            .points()
            .iter()
            .zip(m.values())
            .map(move |(t, v)| vec![i.to_string(), number(*t), number(*v)])
            .collect::<Vec<_>>()
    });
    write_table(&means_path, &["segment", "t", "mean"], rows)?;

    let lrv = truth.long_run_variance.values();
    let file = TruthFile {
        version: fts_bands::VERSION,
        change_cycles: truth.partition.cuts(),
        locations: truth.locations.iter().map(|&v| round_sig(v)).collect(),
        jump_sizes: truth.jump_sizes.iter().map(|&v| round_sig(v)).collect(),
        long_run_variance_min: round_sig(lrv.iter().cloned().fold(f64::INFINITY, f64::min)),
        long_run_variance_max: round_sig(lrv.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
        scenario: spec,
    };
    let truth_path = dir.join(TRUTH_FILE);
    write_text(&truth_path, &toml::to_string(&file).expect("truth serializes to TOML"))?;
    Ok(vec![data_path, means_path, truth_path])
}

#[derive(Debug, Serialize)]
struct CoverageSummary<'a> {
    version: &'static str,
    replications: usize,
    failures: usize,
    coverage: f64,
    mean_half_width: f64,
    change_count_rate: f64,
    relevant_set_rate: f64,
    mean_location_error: f64,
    scenario: &'a ScenarioSpec,
    config: &'a RunConfig,
}

pub const COVERAGE_TABLE: &str = "coverage.csv";
pub const COVERAGE_SUMMARY: &str = "coverage.toml";

/// Runs the study; writes `coverage.csv` and `coverage.toml` when `dir` is given.
pub fn coverage(spec: &ScenarioSpec, cfg: &RunConfig, replications: usize, dir: Option<&Path>) -> Result<CoverageReport> {
    cfg.validate()?;
    if cfg.grid_size != spec.grid_size && cfg.grid_size != crate::config::DEFAULT_GRID_SIZE {
        log::warn!("grid_size {} is ignored; the scenario sets {}", cfg.grid_size, spec.grid_size);
    }
    let report = run_coverage_study(spec, &cfg.pipeline(), replications)?;
    if let Some(dir) = dir {
        create_dir(dir)?;
        let opt = |v: Option<f64>| v.map(number).unwrap_or_default();
        let rows = report.outcomes.iter().enumerate().map(|(r, o)| {
            vec![
                r.to_string(),
                o.seed.to_string(),
                o.contained.map(|c| c.to_string()).unwrap_or_default(),
                o.estimated_changes.to_string(),
                o.relevant_match.to_string(),
                opt(o.location_error),
                opt(Some(o.quantile).filter(|q| q.is_finite())),
                opt(Some(o.mean_half_width).filter(|q| q.is_finite())),
                o.error.clone().unwrap_or_default(),
            ]
        });
        write_table(
            &dir.join(COVERAGE_TABLE),
            &[
                "replication",
                "seed",
                "contained",
                "estimated_changes",
                "relevant_match",
                "location_error",
                "quantile",
                "mean_half_width",
                "error",
            ],
            rows,
        )?;
        let summary = CoverageSummary {
            version: fts_bands::VERSION,
            replications: report.replications,
            failures: report.failures,
            coverage: round_sig(report.coverage),
            mean_half_width: round_sig(report.mean_half_width),
            change_count_rate: round_sig(report.change_count_rate),
            relevant_set_rate: round_sig(report.relevant_set_rate),
            mean_location_error: round_sig(report.mean_location_error),
            scenario: spec,
            config: cfg,
        };
        let text = toml::to_string(&summary).map_err(|e| CliError::Invariant(format!("coverage summary: {e}")))?;
        write_text(&dir.join(COVERAGE_SUMMARY), &text)?;
    }
    Ok(report)
}
