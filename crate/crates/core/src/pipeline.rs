//! End-to-end analysis: detect, filter, estimate, bootstrap, band.

use serde::{Deserialize, Serialize};

use crate::bands::{build_bands, BandMetadata, ConfidenceBandSet, SegmentEstimate};
use crate::bootstrap::{center_residuals, run_bootstrap, BootstrapConfig, BootstrapResult};
use crate::error::{Error, Result};
use crate::fts::{FunctionalTimeSeries, SegmentMeans};
use crate::lrv::{estimate_lrv, LrvConfig, LrvEstimate};
use crate::segmentation::{
    relevant_set, BinarySegmentation, ChangePointDetector, ChangePointSet, RelevantChangeConfig, RelevantSet,
    SegmentationConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct PipelineConfig {
    pub segmentation: SegmentationConfig,
    pub relevance: RelevantChangeConfig,
    pub lrv: LrvConfig,
    pub bootstrap: BootstrapConfig,
    /// Replaces the bootstrap quantile when set (diagnostics only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantile_override: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub change_points: ChangePointSet,
    pub segment_means: SegmentMeans,
    pub relevant: RelevantSet,
    pub lrv: LrvEstimate,
    pub bootstrap: BootstrapResult,
    pub bands: ConfidenceBandSet,
    pub detector: &'static str,
}

impl Analysis {
    pub fn warnings(&self) -> &[String] {
        &self.bootstrap.warnings
    }
}

/// Runs the full pipeline with the default CUSUM detector.
pub fn analyze(x: &FunctionalTimeSeries, cfg: &PipelineConfig) -> Result<Analysis> {
    analyze_with(x, &BinarySegmentation::new(cfg.segmentation), cfg)
}

/// Runs the full pipeline with a caller-supplied detector.
pub fn analyze_with(x: &FunctionalTimeSeries, detector: &dyn ChangePointDetector, cfg: &PipelineConfig) -> Result<Analysis> {
    let change_points = detector.detect(x)?;
    if change_points.n() != x.len() {
        return Err(Error::Invariant("detector returned change points for a different length".into()));
    }
    let relevant = relevant_set(x, &change_points, &cfg.relevance)?;
    let segment_means = SegmentMeans::estimate(x, change_points.partition())?;
    let lrv = estimate_lrv(x, &segment_means, &cfg.lrv)?;
    let residuals = center_residuals(x, &segment_means)?;

    let partition = segment_means.partition();
    let estimates: Vec<SegmentEstimate> = relevant
        .indices
        .iter()
        .map(|&i| SegmentEstimate::new(i, partition.segment(i), segment_means.means()[i].clone()))
        .collect();
    let segments: Vec<_> = estimates.iter().map(|e| e.segment).collect();
    let bootstrap = run_bootstrap(&residuals, &segments, &lrv, &cfg.bootstrap)?;

    let q = cfg.quantile_override.unwrap_or(bootstrap.quantile);
    let mut bands = build_bands(&estimates, &lrv, q, cfg.bootstrap.alpha)?;
    bands.metadata = BandMetadata {
        delta: relevant.delta,
        beta: cfg.relevance.beta,
        block_length: bootstrap.block_length,
        bandwidth: lrv.bandwidth,
        kernel: Some(lrv.kernel),
        seed: cfg.bootstrap.seed,
        quantile_level: bootstrap.level,
        grid_size: x.grid_len(),
    };
    Ok(Analysis {
        change_points,
        segment_means,
        relevant,
        lrv,
        bootstrap,
        bands,
        detector: detector.name(),
    })
}
