//! Output tables and the diagnostics file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use fts_bands::bands::ConfidenceBandSet;
use fts_bands::pipeline::Analysis;
use fts_bands::rng;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::format::{number, round_sig};
use crate::ingest::Ingested;

pub const CHANGEPOINTS_FILE: &str = "changepoints.csv";
pub const BANDS_FILE: &str = "bands.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.toml";

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Comma-separated table with a header row.
pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let io = |e: csv::Error| CliError::Invalid(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// One row per estimated change: index, cycle, location, jump, relevance.
pub fn changepoints_rows(a: &Analysis) -> Vec<Vec<String>> {
    let cps = &a.change_points;
    cps.indices
        .iter()
        .enumerate()
        .map(|(k, &cycle)| {
            let i = k + 1;
            vec![
                i.to_string(),
                cycle.to_string(),
                number(cps.locations[k]),
                number(a.relevant.all_jumps[k]),
                a.relevant.contains(i).to_string(),
            ]
        })
        .collect()
}

pub const CHANGEPOINTS_HEADER: [&str; 5] = ["change", "cycle", "location", "jump", "relevant"];
pub const BANDS_HEADER: [&str; 5] = ["segment", "t", "lower", "center", "upper"];

/// Long-format band table: one row per segment and grid point.
pub fn bands_rows(bands: &ConfidenceBandSet) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for band in &bands.bands {
        for (k, &t) in band.center.grid().points().iter().enumerate() {
            rows.push(vec![
                band.index.to_string(),
                number(t),
                number(band.lower.values()[k]),
                number(band.center.values()[k]),
                number(band.upper.values()[k]),
            ]);
        }
    }
    rows
}

/// A parsed row of `bands.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandRow {
    pub segment: usize,
    pub t: f64,
    pub lower: f64,
    pub center: f64,
    pub upper: f64,
}

pub fn read_bands(path: &Path) -> Result<Vec<BandRow>> {
    let bad = |e: &dyn std::fmt::Display| CliError::Invalid(format!("{}: {e}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(&e))?;
    let header = rdr.headers().map_err(|e| bad(&e))?.clone();
    if header.iter().collect::<Vec<_>>() != BANDS_HEADER {
        return Err(bad(&format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(&e))?;
        let f = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(&e));
        out.push(BandRow {
            segment: rec[0].parse().map_err(|e| bad(&e))?,
            t: f(1)?,
            lower: f(2)?,
            center: f(3)?,
            upper: f(4)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct DataSection {
    input: String,
    layout: &'static str,
    cycles: usize,
    grid_size: usize,
}

#[derive(Debug, Serialize)]
struct SegmentationSection {
    detector: &'static str,
    threshold: f64,
    min_segment_length: usize,
    change_cycles: Vec<usize>,
    locations: Vec<f64>,
    statistics: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct RelevanceSection {
    delta: f64,
    beta: f64,
    relevant: Vec<usize>,
    jumps: Vec<f64>,
    margins: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct LrvSection {
    kernel: &'static str,
    bandwidth: usize,
    sigma2_min: f64,
    sigma2_median: f64,
    sigma2_mean: f64,
    sigma2_max: f64,
    floor: f64,
    floored_points: usize,
}

#[derive(Debug, Serialize)]
struct BootstrapSection {
    quantile: f64,
    level: f64,
    alpha: f64,
    block_length: usize,
    replications: usize,
    seed: u64,
    rng: &'static str,
    /// How often each bootstrapped segment attained the maximum.
    argmax_counts: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct BandSection {
    segment: usize,
    start: usize,
    end: usize,
    n_hat: usize,
    max_half_width: f64,
}

#[derive(Debug, Serialize)]
struct Diagnostics {
    version: &'static str,
    warnings: Vec<String>,
    data: DataSection,
    segmentation: SegmentationSection,
    relevance: RelevanceSection,
    lrv: LrvSection,
    bootstrap: BootstrapSection,
    bands: Vec<BandSection>,
    /// The configuration as given; rerunning it reproduces every output file.
    config: RunConfig,
}

fn r(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&v| round_sig(v)).collect()
}

pub fn diagnostics(cfg: &RunConfig, data: &Ingested, a: &Analysis) -> String {
    let x = &data.series;
    let mut s2 = a.lrv.sigma2.values().to_vec();
    s2.sort_by(f64::total_cmp);
    let mid = s2.len() / 2;
    let median = if s2.len() % 2 == 1 { s2[mid] } else { 0.5 * (s2[mid - 1] + s2[mid]) };
    let mut warnings = data.warnings.clone();
    warnings.extend(a.warnings().iter().cloned());

    let d = Diagnostics {
        version: fts_bands::VERSION,
        warnings,
        data: DataSection {
            input: cfg.input.as_deref().map(|p| p.display().to_string()).unwrap_or_default(),
            layout: data.layout.name(),
            cycles: x.len(),
            grid_size: x.grid_len(),
        },
        segmentation: SegmentationSection {
            detector: a.detector,
            threshold: round_sig(a.change_points.threshold),
            min_segment_length: cfg.segmentation.min_segment_length_for(x.len()),
            change_cycles: a.change_points.indices.clone(),
            locations: r(&a.change_points.locations),
            statistics: r(&a.change_points.statistics),
        },
        relevance: RelevanceSection {
            delta: round_sig(a.relevant.delta),
            beta: cfg.beta,
            relevant: a.relevant.indices.clone(),
            jumps: r(&a.relevant.all_jumps),
            margins: r(&a.relevant.margins),
        },
        lrv: LrvSection {
            kernel: a.lrv.kernel.name(),
            bandwidth: a.lrv.bandwidth,
            sigma2_min: round_sig(s2[0]),
            sigma2_median: round_sig(median),
            sigma2_mean: round_sig(s2.iter().sum::<f64>() / s2.len() as f64),
            sigma2_max: round_sig(s2[s2.len() - 1]),
            floor: round_sig(a.lrv.floor),
            floored_points: a.lrv.floored_points,
        },
        bootstrap: BootstrapSection {
            quantile: round_sig(a.bands.quantile),
            level: round_sig(a.bootstrap.level),
            alpha: a.bootstrap.alpha,
            block_length: a.bootstrap.block_length,
            replications: a.bootstrap.replications,
            seed: a.bootstrap.seed,
            rng: rng::ALGORITHM,
            argmax_counts: a.bootstrap.argmax_counts.clone(),
        },
        bands: a
            .bands
            .bands
            .iter()
            .map(|b| BandSection {
                segment: b.index,
                start: b.segment.start,
                end: b.segment.end,
                n_hat: b.n_hat,
                max_half_width: round_sig(b.half_width.sup_norm()),
            })
            .collect(),
        config: cfg.clone(),
    };
    toml::to_string(&d).expect("diagnostics serialize to TOML")
}

/// Paths of the files written by `analyze`.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub changepoints: PathBuf,
    pub bands: PathBuf,
    pub diagnostics: PathBuf,
}

pub fn write_analysis(dir: &Path, cfg: &RunConfig, data: &Ingested, a: &Analysis) -> Result<Artifacts> {
    create_dir(dir)?;
    let out = Artifacts {
        changepoints: dir.join(CHANGEPOINTS_FILE),
        bands: dir.join(BANDS_FILE),
        diagnostics: dir.join(DIAGNOSTICS_FILE),
    };
    write_table(&out.changepoints, &CHANGEPOINTS_HEADER, changepoints_rows(a))?;
    write_table(&out.bands, &BANDS_HEADER, bands_rows(&a.bands))?;
    write_text(&out.diagnostics, &diagnostics(cfg, data, a))?;
    Ok(out)
}
