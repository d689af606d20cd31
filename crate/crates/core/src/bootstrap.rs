//! Multiplier block bootstrap for the max-over-segments sup-norm statistic.
//!
//! With residuals `Y_j = X_j − μ̂⁽ʲ⁾` and standard normal multipliers `ν_j`,
//! each replicate forms
//!
//! ```text
//! B_j   = L^{-1/2} Σ_{l<L} Y_{j+l}                  (block average, truncated at n)
//! μ̂ᵢ*   = n̂ᵢ^{-1} Σ_{j ∈ segment i} ν_j · B_j
//! T*    = max_{i ∈ Î} √n̂ᵢ · sup_t |μ̂ᵢ*(t) / σ̂(t)|
//! ```
//!
//! One multiplier is drawn per time index and shared by every grid point and
//! every segment of the replicate. Replicate `r` draws from RNG stream `r`, so
//! the result is identical however replicates are scheduled across threads.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fts::{Curve, FunctionalTimeSeries, Segment, SegmentMeans};
use crate::lrv::{floor_root, LrvEstimate};
use crate::rng;
use crate::segmentation::RelevantChangeConfig;
use crate::tuning::Tuning;

/// Which bootstrap quantile sets the band half-width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuantileConvention {
    /// `q*_{1−α/2}`.
    #[default]
    HalfAlpha,
    /// `q*_{1−α}`.
    FullAlpha,
}

impl QuantileConvention {
    pub fn level(self, alpha: f64) -> f64 {
        match self {
            QuantileConvention::HalfAlpha => 1.0 - alpha / 2.0,
            QuantileConvention::FullAlpha => 1.0 - alpha,
        }
    }
}

impl std::str::FromStr for QuantileConvention {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "half_alpha" => Ok(QuantileConvention::HalfAlpha),
            "full_alpha" => Ok(QuantileConvention::FullAlpha),
            other => Err(format!("unknown quantile convention {other:?} (half_alpha, full_alpha)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    /// Block length `L`; `auto` uses [`auto_block_length`] of the shortest relevant segment.
    pub block_length: Tuning<usize>,
    pub replications: usize,
    pub alpha: f64,
    pub seed: u64,
    pub convention: QuantileConvention,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            block_length: Tuning::Auto,
            replications: 2000,
            alpha: 0.1,
            seed: 0,
            convention: QuantileConvention::default(),
        }
    }
}

impl BootstrapConfig {
    pub fn quantile_level(&self) -> f64 {
        self.convention.level(self.alpha)
    }
}

/// `max(1, ⌊n̂_min^{1/3}⌋)`, capped at `n̂_min`.
pub fn auto_block_length(n_min: usize) -> usize {
    (floor_root(n_min as u64, 3) as usize).max(1).min(n_min.max(1))
}

/// Segment-centered residuals `Y_j = X_j − μ̂⁽ʲ⁾`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    series: FunctionalTimeSeries,
}

impl ResidualSeries {
    pub fn series(&self) -> &FunctionalTimeSeries {
        &self.series
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }
}

/// Subtracts from each curve the mean of the segment containing it (every segment, relevant or not).
pub fn center_residuals(x: &FunctionalTimeSeries, means: &SegmentMeans) -> Result<ResidualSeries> {
    if means.partition().n() != x.len() {
        return Err(Error::invalid("segment means do not match the series length"));
    }
    let mut data = Vec::with_capacity(x.as_slice().len());
    for (j, row) in x.rows().enumerate() {
        let mu = means.mean_for(j)?;
        data.extend(row.iter().zip(mu.values()).map(|(v, m)| v - m));
    }
    Ok(ResidualSeries { series: FunctionalTimeSeries::from_matrix(x.grid().clone(), data)? })
}

/// Block averages `B_j` for `j` in a range, stored row-major.
struct BlockAverages {
    first: usize,
    grid_len: usize,
    data: Vec<f64>,
}

impl BlockAverages {
    fn new(y: &ResidualSeries, from: usize, to: usize, block: usize) -> Self {
        let s = &y.series;
        let n = s.len();
        let t = s.grid_len();
        let mut data = vec![0.0; (to - from) * t];
        for (row, j) in data.chunks_exact_mut(t).zip(from..to) {
            let stop = (j + block).min(n);
            for k in j..stop {
                for (b, v) in row.iter_mut().zip(s.row(k)) {
                    *b += v;
                }
            }
            let scale = 1.0 / ((stop - j) as f64).sqrt();
            row.iter_mut().for_each(|b| *b *= scale);
        }
        BlockAverages { first: from, grid_len: t, data }
    }

    fn row(&self, j: usize) -> &[f64] {
        let i = j - self.first;
        &self.data[i * self.grid_len..(i + 1) * self.grid_len]
    }

    /// `n̂⁻¹ Σ_{j∈seg} ν_j B_j` into `out`, with `multipliers[j]` indexed by absolute time.
    fn weighted_mean(&self, seg: &Segment, multipliers: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for j in seg.start..seg.end {
            let nu = multipliers[j];
            for (o, b) in out.iter_mut().zip(self.row(j)) {
                *o += nu * b;
            }
        }
        let inv = 1.0 / seg.len() as f64;
        out.iter_mut().for_each(|o| *o *= inv);
    }
}

/// Bootstrap mean `μ̂ᵢ*` of one segment for given multipliers (`multipliers[k]` belongs to `seg.start + k`).
pub fn bootstrap_segment_mean(y: &ResidualSeries, seg: &Segment, block: usize, multipliers: &[f64]) -> Result<Curve> {
    if block == 0 {
        return Err(Error::invalid("block length must be at least 1"));
    }
    if block > seg.len() {
        return Err(Error::invalid(format!(
            "block length {block} exceeds segment length {}",
            seg.len()
        )));
    }
    if seg.end > y.len() {
        return Err(Error::invalid("segment exceeds the residual series"));
    }
    if multipliers.len() != seg.len() {
        return Err(Error::invalid(format!(
            "need {} multipliers, got {}",
            seg.len(),
            multipliers.len()
        )));
    }
    let blocks = BlockAverages::new(y, seg.start, seg.end, block);
    let mut padded = vec![0.0; seg.end];
    padded[seg.start..].copy_from_slice(multipliers);
    let mut out = vec![0.0; y.series.grid_len()];
    blocks.weighted_mean(seg, &padded, &mut out);
    Curve::new(y.series.grid().clone(), out)
}

#[derive(Debug, Clone)]
pub struct BootstrapResult {
    /// `T*` per replicate, in replicate order.
    pub statistics: Vec<f64>,
    /// Empirical quantile of `statistics` at `level`.
    pub quantile: f64,
    pub level: f64,
    pub alpha: f64,
    pub block_length: usize,
    pub replications: usize,
    pub seed: u64,
    pub convention: QuantileConvention,
    pub rng: &'static str,
    /// How often each bootstrapped segment attained the maximum, aligned with the input segments.
    pub argmax_counts: Vec<usize>,
    pub warnings: Vec<String>,
}

impl BootstrapResult {
    /// Quantile of the same replicates at another level.
    pub fn quantile_at(&self, level: f64) -> f64 {
        let mut sorted = self.statistics.clone();
        sorted.sort_by(f64::total_cmp);
        empirical_quantile(&sorted, level)
    }
}

/// "Higher" empirical quantile: the smallest order statistic with rank `≥ ⌈level · R⌉`.
pub fn empirical_quantile(sorted: &[f64], level: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let r = sorted.len();
    let raw = level * r as f64;
    let rank = ((raw - 1e-9 * raw.max(1.0)).ceil() as usize).clamp(1, r);
    sorted[rank - 1]
}

fn check_config(cfg: &BootstrapConfig) -> Result<Vec<String>> {
    if cfg.replications < 1 {
        return Err(Error::invalid("at least one bootstrap replication is required"));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", cfg.alpha)));
    }
    let mut warnings = Vec::new();
    if cfg.replications < 100 {
        let msg = format!("only {} bootstrap replications; quantile unstable", cfg.replications);
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(warnings)
}

fn draw_multipliers(seed: u64, replicate: usize, n: usize) -> Vec<f64> {
    let mut rng = rng::stream(seed, replicate as u64);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Runs `R` replicates of `T*` over the given (relevant) segments and extracts the quantile.
pub fn run_bootstrap(
    y: &ResidualSeries,
    segments: &[Segment],
    lrv: &LrvEstimate,
    cfg: &BootstrapConfig,
) -> Result<BootstrapResult> {
    let mut warnings = check_config(cfg)?;
    if segments.is_empty() {
        return Err(Error::invalid("no segments to bootstrap"));
    }
    let n = y.len();
    if segments.iter().any(|s| s.end > n || s.is_empty()) {
        return Err(Error::invalid("bootstrap segment outside the residual series"));
    }
    if !crate::fts::Grid::same(y.series.grid(), lrv.grid()) {
        return Err(Error::invalid("variance estimate is on a different grid than the residuals"));
    }
    let n_min = segments.iter().map(Segment::len).min().unwrap_or(0);
    let block = cfg.block_length.resolve(|| auto_block_length(n_min));
    if block == 0 || block > n_min {
        return Err(Error::invalid(format!(
            "block length {block} must lie in [1, {n_min}] (shortest bootstrapped segment)"
        )));
    }
    if lrv.sigma2.values().iter().any(|&v| v <= 0.0) {
        return Err(Error::invalid("variance estimate must be floored positive"));
    }
    warnings.extend(lrv.warnings.iter().cloned());

    let from = segments.iter().map(|s| s.start).min().unwrap_or(0);
    let to = segments.iter().map(|s| s.end).max().unwrap_or(0);
    let blocks = BlockAverages::new(y, from, to, block);
    let inv_sigma: Vec<f64> = lrv.sigma().iter().map(|s| 1.0 / s).collect();
    let t = y.series.grid_len();

    let per_replicate: Vec<(f64, usize)> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let nu = draw_multipliers(cfg.seed, r, to);
            let mut buf = vec![0.0; t];
            let mut best = (0.0_f64, 0usize);
            for (i, seg) in segments.iter().enumerate() {
                blocks.weighted_mean(seg, &nu, &mut buf);
                let sup = buf
                    .iter()
                    .zip(&inv_sigma)
                    .fold(0.0_f64, |m, (v, is)| m.max((v * is).abs()));
                let stat = (seg.len() as f64).sqrt() * sup;
                if stat > best.0 {
                    best = (stat, i);
                }
            }
            best
        })
        .collect();

    let statistics: Vec<f64> = per_replicate.iter().map(|&(s, _)| s).collect();
    let mut argmax_counts = vec![0; segments.len()];
    for &(_, i) in &per_replicate {
        argmax_counts[i] += 1;
    }
    let level = cfg.quantile_level();
    let mut sorted = statistics.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(BootstrapResult {
        quantile: empirical_quantile(&sorted, level),
        statistics,
        level,
        alpha: cfg.alpha,
        block_length: block,
        replications: cfg.replications,
        seed: cfg.seed,
        convention: cfg.convention,
        rng: rng::ALGORITHM,
        argmax_counts,
        warnings,
    })
}

/// Bootstrap `(1 − β)`-quantiles of `‖(μ̂ᵢ* − μ̂ᵢ₋₁*)‖∞` for every change, in data units.
///
/// Used by the bootstrap-calibrated relevance filter: a change is declared
/// relevant when its estimated jump exceeds `Δ` plus this margin.
pub fn jump_margins(x: &FunctionalTimeSeries, means: &SegmentMeans, cfg: &RelevantChangeConfig) -> Result<Vec<f64>> {
    let y = center_residuals(x, means)?;
    let segments = means.partition().segments();
    let n_min = segments.iter().map(Segment::len).min().unwrap_or(0);
    let block = auto_block_length(n_min);
    let replications = cfg.calibration_replications;
    if replications < 1 {
        return Err(Error::invalid("calibration needs at least one replication"));
    }
    let n = x.len();
    let t = x.grid_len();
    let blocks = BlockAverages::new(&y, 0, n, block);
    let changes = segments.len() - 1;

    let sups: Vec<Vec<f64>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let nu = draw_multipliers(cfg.calibration_seed, r, n);
            let boot: Vec<Vec<f64>> = segments
                .iter()
                .map(|seg| {
                    let mut buf = vec![0.0; t];
                    blocks.weighted_mean(seg, &nu, &mut buf);
                    buf
                })
                .collect();
            boot.windows(2)
                .map(|w| w[1].iter().zip(&w[0]).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
                .collect()
        })
        .collect();

    Ok((0..changes)
        .map(|i| {
            let mut col: Vec<f64> = sups.iter().map(|s| s[i]).collect();
            col.sort_by(f64::total_cmp);
            empirical_quantile(&col, 1.0 - cfg.beta)
        })
        .collect())
}
