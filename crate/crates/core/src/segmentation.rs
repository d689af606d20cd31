//! Change point estimation and the relevant-change filter.
//!
//! Detection is a binary segmentation on the functional CUSUM process
//!
//! ```text
//! Û(k, t) = N^{-1/2} · ( Σ_{j<k} X_j(t) − (k/N) · Σ_{j<N} X_j(t) )
//! ```
//!
//! computed within each candidate interval of length `N`. An interval is split
//! at the `k` maximizing `sup_t |Û(k, t)|` whenever that maximum exceeds the
//! threshold `ξ`. Splits are taken best-first so a cap on the number of
//! changes keeps the strongest ones.
//!
//! A change `i` (between segments `i − 1` and `i`) is *relevant* when the
//! sup-norm jump of the estimated segment means strictly exceeds `Δ`.
//! Segment 0 is always part of the relevant set.

use serde::{Deserialize, Serialize};

use crate::bootstrap;
use crate::error::{Error, Result};
use crate::fts::{segment_mean, Curve, FunctionalTimeSeries, Partition, Segment, SegmentMeans};
use crate::tuning::Tuning;

/// Median of a chi-square variable with one degree of freedom.
const CHI2_1_MEDIAN: f64 = 0.454_936_423_119_572_7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationConfig {
    /// CUSUM threshold `ξ`; `auto` uses [`auto_threshold`].
    pub threshold: Tuning<f64>,
    /// Multiplier `c₀` of the automatic threshold.
    pub threshold_constant: f64,
    /// Minimum number of curves per segment; `auto` is `max(20, ⌈√n⌉)`.
    pub min_segment_length: Tuning<usize>,
    pub max_changes: usize,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            threshold: Tuning::Auto,
            threshold_constant: 1.5,
            min_segment_length: Tuning::Auto,
            max_changes: 32,
        }
    }
}

impl SegmentationConfig {
    pub fn min_segment_length_for(&self, n: usize) -> usize {
        self.min_segment_length.resolve(|| default_min_segment_length(n))
    }
}

pub fn default_min_segment_length(n: usize) -> usize {
    let root = crate::lrv::floor_root(n as u64, 2) as usize;
    let ceil_root = if root * root == n { root } else { root + 1 };
    ceil_root.max(20)
}

/// Estimated change points, ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangePointSet {
    n: usize,
    /// First index of each new segment, `⌊n ŝᵢ⌋`.
    pub indices: Vec<usize>,
    /// Rescaled locations `ŝᵢ = index / n`.
    pub locations: Vec<f64>,
    /// CUSUM statistic at each accepted split, aligned with `indices`.
    pub statistics: Vec<f64>,
    /// Threshold the detector used.
    pub threshold: f64,
}

impl ChangePointSet {
    pub fn from_indices(n: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        Partition::new(n, indices.clone())?;
        let locations = indices.iter().map(|&k| k as f64 / n as f64).collect();
        let statistics = vec![f64::NAN; indices.len()];
        Ok(ChangePointSet { n, indices, locations, statistics, threshold: f64::NAN })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn partition(&self) -> Partition {
        Partition::new(self.n, self.indices.clone()).expect("change indices are validated on construction")
    }
}

/// Anything that can estimate mean change points of a functional series.
pub trait ChangePointDetector: Send + Sync {
    fn detect(&self, x: &FunctionalTimeSeries) -> Result<ChangePointSet>;

    fn name(&self) -> &'static str;
}

/// CUSUM binary segmentation.
#[derive(Debug, Clone, Default)]
pub struct BinarySegmentation {
    pub config: SegmentationConfig,
}

impl BinarySegmentation {
    pub fn new(config: SegmentationConfig) -> Self {
        BinarySegmentation { config }
    }
}

impl ChangePointDetector for BinarySegmentation {
    fn detect(&self, x: &FunctionalTimeSeries) -> Result<ChangePointSet> {
        detect_change_points(x, &self.config)
    }

    fn name(&self) -> &'static str {
        "cusum-binary-segmentation"
    }
}

#[derive(Debug, Clone, Copy)]
struct Split {
    start: usize,
    end: usize,
    at: usize,
    stat: f64,
}

/// Binary segmentation with the configured or automatic threshold.
pub fn detect_change_points(x: &FunctionalTimeSeries, cfg: &SegmentationConfig) -> Result<ChangePointSet> {
    let n = x.len();
    let h = cfg.min_segment_length_for(n);
    if h < 2 {
        return Err(Error::invalid("min_segment_length must be at least 2"));
    }
    if n < 2 * h {
        return Err(Error::invalid(format!(
            "series of {n} curves is shorter than twice the minimum segment length {h}"
        )));
    }
    let threshold = match cfg.threshold {
        Tuning::Fixed(xi) if xi.is_finite() && xi >= 0.0 => xi,
        Tuning::Fixed(xi) => return Err(Error::invalid(format!("invalid CUSUM threshold {xi}"))),
        Tuning::Auto => {
            auto_threshold(x, cfg.threshold_constant, pilot_block_length(n))?
        }
    };

    let mut pending: Vec<Split> = best_split(x, 0, n, h).into_iter().collect();
    let mut accepted: Vec<(usize, f64)> = Vec::new();
    while accepted.len() < cfg.max_changes {
        // Strongest pending split; ties go to the smallest index.
        let best = pending
            .iter()
            .enumerate()
            .filter(|(_, s)| s.stat > threshold)
            .max_by(|(_, a), (_, b)| a.stat.total_cmp(&b.stat).then(b.at.cmp(&a.at)))
            .map(|(i, _)| i);
        let Some(i) = best else { break };
        let split = pending.swap_remove(i);
        accepted.push((split.at, split.stat));
        pending.extend(best_split(x, split.start, split.at, h));
        pending.extend(best_split(x, split.at, split.end, h));
    }
    accepted.sort_unstable_by_key(|&(k, _)| k);

    let indices: Vec<usize> = accepted.iter().map(|&(k, _)| k).collect();
    Ok(ChangePointSet {
        n,
        locations: indices.iter().map(|&k| k as f64 / n as f64).collect(),
        statistics: accepted.iter().map(|&(_, s)| s).collect(),
        indices,
        threshold,
    })
}

/// Maximizer of `sup_t |Û(k, t)|` over admissible splits of `[start, end)`.
fn best_split(x: &FunctionalTimeSeries, start: usize, end: usize, h: usize) -> Option<Split> {
    let len = end - start;
    if len < 2 * h {
        return None;
    }
    let scan = cusum_scan(x, start, end);
    let mut best: Option<Split> = None;
    for k in h..=len - h {
        let stat = scan[k];
        if best.is_none_or(|b| stat > b.stat) {
            best = Some(Split { start, end, at: start + k, stat });
        }
    }
    best
}

/// `sup_t |Û(k, t)|` for every `k = 0..=N` of the interval `[start, end)`.
///
/// Sums run over deviations from the interval's first curve, so a constant
/// interval yields exact zeros.
pub fn cusum_scan(x: &FunctionalTimeSeries, start: usize, end: usize) -> Vec<f64> {
    let len = end - start;
    let t = x.grid_len();
    let pivot = x.row(start);
    let mut total = vec![0.0; t];
    for j in start..end {
        for ((s, v), p) in total.iter_mut().zip(x.row(j)).zip(pivot) {
            *s += v - p;
        }
    }
    let scale = 1.0 / (len as f64).sqrt();
    let mut partial = vec![0.0; t];
    let mut out = Vec::with_capacity(len + 1);
    out.push(0.0);
    for k in 1..=len {
        for ((s, v), p) in partial.iter_mut().zip(x.row(start + k - 1)).zip(pivot) {
            *s += v - p;
        }
        let frac = k as f64 / len as f64;
        let sup = partial
            .iter()
            .zip(&total)
            .fold(0.0_f64, |m, (s, tot)| m.max((s - frac * tot).abs()));
        out.push(sup * scale);
    }
    out
}

/// Block length of the pilot variance estimate: `max(2, ⌈n^{1/3}⌉)`.
///
/// Short blocks keep the share of block differences straddling a change small.
pub fn pilot_block_length(n: usize) -> usize {
    let r = crate::lrv::floor_root(n as u64, 3) as usize;
    let ceil = if r * r * r == n { r } else { r + 1 };
    ceil.max(2)
}

/// `ξ = c₀ · σ̄ · √(2 log n)` with `σ̄` the median over the grid of the pilot long-run standard deviation.
pub fn auto_threshold(x: &FunctionalTimeSeries, constant: f64, block: usize) -> Result<f64> {
    let pilot = pilot_long_run_variance(x, block)?;
    let mut sd: Vec<f64> = pilot.values().iter().map(|v| v.sqrt()).collect();
    sd.sort_by(f64::total_cmp);
    let sigma_bar = median_sorted(&sd);
    let n = x.len() as f64;
    Ok(constant * sigma_bar * (2.0 * n.ln()).sqrt())
}

/// Mean-shift robust long-run variance for threshold calibration.
///
/// Splits the series into blocks of `block` curves and uses the median of
/// squared differences of adjacent block means: away from change points,
/// `block · (M_{k+1} − M_k)² / 2` is approximately `σ²(t) · χ²₁`, and the few
/// differences straddling a change do not move the median.
pub fn pilot_long_run_variance(x: &FunctionalTimeSeries, block: usize) -> Result<Curve> {
    let n = x.len();
    let block = block.max(1);
    let blocks = n / block;
    if blocks < 2 {
        return Err(Error::invalid(format!("need at least two blocks of {block} curves, have {n} curves")));
    }
    let means = (0..blocks)
        .map(|b| segment_mean(x, &Segment::new(b * block, (b + 1) * block, n)?))
        .collect::<Result<Vec<_>>>()?;
    let t = x.grid_len();
    let mut out = Vec::with_capacity(t);
    let mut sq = Vec::with_capacity(blocks - 1);
    for k in 0..t {
        sq.clear();
        sq.extend(means.windows(2).map(|w| {
            let d = w[1].values()[k] - w[0].values()[k];
            d * d
        }));
        sq.sort_by(f64::total_cmp);
        out.push(block as f64 * median_sorted(&sq) / (2.0 * CHI2_1_MEDIAN));
    }
    Curve::new(x.grid().clone(), out)
}

fn median_sorted(v: &[f64]) -> f64 {
    let m = v.len();
    if m == 0 {
        return 0.0;
    }
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// How the relevant-change filter decides `‖μ̂ᵢ − μ̂ᵢ₋₁‖∞ > Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RelevanceMode {
    /// Compare the estimated jump with `Δ` directly.
    #[default]
    PlugIn,
    /// Require the jump to exceed `Δ` plus the bootstrap `(1 − β)`-quantile of the jump estimation error.
    Bootstrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelevantChangeConfig {
    /// Relevance threshold `Δ`; `auto` uses [`auto_delta`].
    pub delta: Tuning<f64>,
    pub beta: f64,
    /// Fraction of the series averaged at each end by [`auto_delta`].
    pub auto_fraction: f64,
    pub auto_divisor: f64,
    pub mode: RelevanceMode,
    /// Replications and seed of the bootstrap-calibrated mode.
    pub calibration_replications: usize,
    pub calibration_seed: u64,
}

impl Default for RelevantChangeConfig {
    fn default() -> Self {
        RelevantChangeConfig {
            delta: Tuning::Auto,
            beta: 0.05,
            auto_fraction: 0.05,
            auto_divisor: 3.0,
            mode: RelevanceMode::PlugIn,
            calibration_replications: 1000,
            calibration_seed: 0,
        }
    }
}

impl RelevantChangeConfig {
    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::invalid(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if let Tuning::Fixed(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::invalid(format!("delta must be positive, got {d}")));
            }
        }
        Ok(())
    }
}

/// Segment indices judged relevant, with their jump sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevantSet {
    /// Segment indices; always starts with 0.
    pub indices: Vec<usize>,
    /// `‖μ̂ᵢ − μ̂ᵢ₋₁‖∞` for each `i ≥ 1` in `indices`, in order.
    pub jump_sizes: Vec<f64>,
    /// Estimated jump of every change `1..=m̂`, relevant or not.
    pub all_jumps: Vec<f64>,
    /// Margin added to `Δ` per change (zero in plug-in mode).
    pub margins: Vec<f64>,
    pub delta: f64,
}

impl RelevantSet {
    pub fn contains(&self, i: usize) -> bool {
        self.indices.contains(&i)
    }

    /// Whether change `i` (1-based) was judged relevant.
    pub fn is_relevant_change(&self, i: usize) -> bool {
        i >= 1 && self.contains(i)
    }
}

/// `‖μ̂_final − μ̂_initial‖∞ / divisor` over the first and last `⌈fraction · n⌉` curves.
pub fn auto_delta(x: &FunctionalTimeSeries, cfg: &RelevantChangeConfig) -> Result<f64> {
    let n = x.len();
    if !(cfg.auto_fraction > 0.0 && cfg.auto_fraction <= 1.0) {
        return Err(Error::invalid("auto_fraction must lie in (0, 1]"));
    }
    if !(cfg.auto_divisor > 0.0) {
        return Err(Error::invalid("auto_divisor must be positive"));
    }
    let raw = cfg.auto_fraction * n as f64;
    // Guard against products like 0.05 * 400 landing a hair above an integer.
    let window = (raw - 1e-9 * raw.max(1.0)).ceil() as usize;
    if raw < 1.0 || window == 0 {
        return Err(Error::invalid(format!(
            "auto delta window of {raw} curves is empty; set delta explicitly"
        )));
    }
    let window = window.min(n);
    let initial = segment_mean(x, &Segment::new(0, window, n)?)?;
    let last = segment_mean(x, &Segment::new(n - window, n, n)?)?;
    Ok(last.sub(&initial)?.sup_norm() / cfg.auto_divisor)
}

/// Resolves `Δ`, rejecting a non-positive automatic value.
pub fn resolve_delta(x: &FunctionalTimeSeries, cfg: &RelevantChangeConfig) -> Result<f64> {
    cfg.validate()?;
    match cfg.delta {
        Tuning::Fixed(d) => Ok(d),
        Tuning::Auto => {
            let d = auto_delta(x, cfg)?;
            if d > 0.0 {
                Ok(d)
            } else {
                Err(Error::invalid("automatic delta is zero (identical ends); set delta explicitly"))
            }
        }
    }
}

/// Relevant set `{0} ∪ {i ≥ 1 : ‖μ̂ᵢ − μ̂ᵢ₋₁‖∞ > Δ + marginᵢ}`.
pub fn relevant_set(x: &FunctionalTimeSeries, cps: &ChangePointSet, cfg: &RelevantChangeConfig) -> Result<RelevantSet> {
    if cps.n() != x.len() {
        return Err(Error::invalid("change points were estimated on a series of different length"));
    }
    let delta = resolve_delta(x, cfg)?;
    let means = SegmentMeans::estimate(x, cps.partition())?;
    let all_jumps = means
        .means()
        .windows(2)
        .map(|w| w[1].sub(&w[0]).map(|d| d.sup_norm()))
        .collect::<Result<Vec<_>>>()?;
    let margins = match cfg.mode {
        RelevanceMode::PlugIn => vec![0.0; all_jumps.len()],
        RelevanceMode::Bootstrap if all_jumps.is_empty() => Vec::new(),
        RelevanceMode::Bootstrap => bootstrap::jump_margins(x, &means, cfg)?,
    };
    Ok(filter_relevant(delta, all_jumps, margins))
}

/// Applies the strict `jump > Δ + margin` rule to precomputed jumps.
pub fn filter_relevant(delta: f64, all_jumps: Vec<f64>, margins: Vec<f64>) -> RelevantSet {
    let mut indices = vec![0];
    let mut jump_sizes = Vec::new();
    for (i, (&jump, &margin)) in all_jumps.iter().zip(&margins).enumerate() {
        if jump > delta + margin {
            indices.push(i + 1);
            jump_sizes.push(jump);
        }
    }
    RelevantSet { indices, jump_sizes, all_jumps, margins, delta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fts::Grid;
    use crate::simulate::{ErrorProcess, NoiseGenerator};

    fn with_noise(means: &[(usize, fn(f64) -> f64)], n: usize, t: usize, sd: f64, seed: u64) -> FunctionalTimeSeries {
        let grid = Grid::uniform(t).unwrap();
        let tau2 = Curve::constant(grid.clone(), sd * sd).unwrap();
        let noise = NoiseGenerator::new(ErrorProcess::Iid, &tau2).unwrap().sample(n, seed).unwrap();
        noise
            .map_rows(|j, row| {
                let f = means.iter().rev().find(|(start, _)| j >= *start).unwrap().1;
                for (v, &tt) in row.iter_mut().zip(grid.points()) {
                    *v += f(tt);
                }
            })
            .unwrap()
    }

    /// Brute-force argmax of the full-sample CUSUM, written independently of `cusum_scan`.
    fn brute_force_argmax(x: &FunctionalTimeSeries, h: usize) -> usize {
        let n = x.len();
        let t = x.grid_len();
        let mut best = (0, f64::NEG_INFINITY);
        for k in h..=n - h {
            let mut sup = 0.0_f64;
            for p in 0..t {
                let left: f64 = (0..k).map(|j| x.row(j)[p]).sum();
                let all: f64 = (0..n).map(|j| x.row(j)[p]).sum();
                sup = sup.max((left - k as f64 / n as f64 * all).abs() / (n as f64).sqrt());
            }
            if sup > best.1 + 1e-12 {
                best = (k, sup);
            }
        }
        best.0
    }

    #[test]
    fn single_jump_is_located() {
        let x = with_noise(&[(0, |_| 0.0), (100, |t| 10.0 * t)], 200, 30, 0.1, 1);
        let cps = detect_change_points(&x, &SegmentationConfig::default()).unwrap();
        assert_eq!(cps.len(), 1);
        assert!((0.45..=0.55).contains(&cps.locations[0]));
        assert_eq!(cps.indices[0], brute_force_argmax(&x, 20));
    }

    #[test]
    fn two_jumps_are_located() {
        let x = with_noise(&[(0, |_| 0.0), (100, |_| 10.0), (200, |_| 0.0)], 300, 20, 0.1, 2);
        let cps = detect_change_points(&x, &SegmentationConfig::default()).unwrap();
        assert_eq!(cps.len(), 2);
        assert!((cps.locations[0] - 1.0 / 3.0).abs() <= 0.05);
        assert!((cps.locations[1] - 2.0 / 3.0).abs() <= 0.05);
    }

    #[test]
    fn constant_mean_gives_no_changes() {
        let x = with_noise(&[(0, |t| t * t)], 300, 20, 1.0, 3);
        let cfg = SegmentationConfig { threshold: Tuning::Fixed(1e3), ..Default::default() };
        assert!(detect_change_points(&x, &cfg).unwrap().is_empty());
        assert!(detect_change_points(&x, &SegmentationConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn noiseless_recovery_is_exact() {
        let grid = Grid::uniform(15).unwrap();
        let cuts = [37, 90, 151];
        let levels = [|t: f64| t, |t: f64| 2.0 - t, |t: f64| (3.0 * t).sin(), |_| -1.5];
        let rows = (0..200)
            .map(|j| {
                let seg = cuts.partition_point(|&c| c <= j);
                grid.points().iter().map(|&t| levels[seg](t)).collect()
            })
            .collect();
        let x = FunctionalTimeSeries::from_rows(grid, rows).unwrap();
        let cps = detect_change_points(&x, &SegmentationConfig::default()).unwrap();
        assert_eq!(cps.indices, cuts.to_vec());
    }

    #[test]
    fn short_series_is_rejected() {
        let x = with_noise(&[(0, |_| 0.0)], 39, 5, 1.0, 4);
        assert!(detect_change_points(&x, &SegmentationConfig::default()).is_err());
        let cfg = SegmentationConfig { min_segment_length: Tuning::Fixed(1), ..Default::default() };
        assert!(detect_change_points(&x, &cfg).is_err());
    }

    #[test]
    fn max_changes_keeps_strongest() {
        let x = with_noise(&[(0, |_| 0.0), (60, |_| 1.0), (120, |_| 9.0)], 180, 5, 0.05, 5);
        let cfg = SegmentationConfig { max_changes: 1, ..Default::default() };
        let cps = detect_change_points(&x, &cfg).unwrap();
        assert_eq!(cps.indices, vec![120]);
        let cfg = SegmentationConfig { max_changes: 0, ..Default::default() };
        assert!(detect_change_points(&x, &cfg).unwrap().is_empty());
    }

    #[test]
    fn detection_ignores_grid_order() {
        let x = with_noise(&[(0, |t| t), (70, |t| 3.0 * t * t)], 160, 12, 0.5, 6);
        let perm: Vec<usize> = vec![5, 0, 11, 3, 8, 1, 10, 2, 7, 4, 9, 6];
        let y = x.permute_grid(&perm).unwrap();
        let cfg = SegmentationConfig::default();
        let a = detect_change_points(&x, &cfg).unwrap();
        let b = detect_change_points(&y, &cfg).unwrap();
        assert_eq!(a.indices, b.indices);
        assert_eq!(a.threshold, b.threshold);
    }

    #[test]
    fn default_min_segment_length_rule() {
        assert_eq!(default_min_segment_length(100), 20);
        assert_eq!(default_min_segment_length(400), 20);
        assert_eq!(default_min_segment_length(401), 21);
        assert_eq!(default_min_segment_length(1830), 43);
    }

    fn two_level_series(n: usize, initial: f64, last: f64) -> FunctionalTimeSeries {
        let grid = Grid::uniform(10).unwrap();
        let rows = (0..n).map(|j| vec![if j < n / 2 { initial } else { last }; 10]).collect();
        FunctionalTimeSeries::from_rows(grid, rows).unwrap()
    }

    #[test]
    fn auto_delta_cases() {
        let cfg = RelevantChangeConfig::default();
        assert_eq!(auto_delta(&two_level_series(400, 1.0, 1.0), &cfg).unwrap(), 0.0);
        assert_eq!(auto_delta(&two_level_series(400, 4.0, 13.0), &cfg).unwrap(), 3.0);
        let d = auto_delta(&two_level_series(400, 0.0, 19.8), &cfg).unwrap();
        assert!((d - 6.6).abs() <= 1e-12, "{d}");
        assert!(auto_delta(&two_level_series(10, 0.0, 1.0), &cfg).is_err());
        assert!(resolve_delta(&two_level_series(400, 1.0, 1.0), &cfg).is_err());
    }

    #[test]
    fn auto_delta_uses_ceiling_window() {
        // n = 30: window ⌈1.5⌉ = 2, so the first two and last two curves enter the ends.
        let grid = Grid::uniform(1).unwrap();
        let rows = (0..30).map(|j| vec![j as f64]).collect();
        let x = FunctionalTimeSeries::from_rows(grid, rows).unwrap();
        let d = auto_delta(&x, &RelevantChangeConfig::default()).unwrap();
        assert_eq!(d, (28.5 - 0.5) / 3.0);
    }

    #[test]
    fn relevant_filter_is_strict() {
        let set = filter_relevant(6.6, vec![8.1, 2.0], vec![0.0, 0.0]);
        assert_eq!(set.indices, vec![0, 1]);
        assert_eq!(set.jump_sizes, vec![8.1]);
        let set = filter_relevant(6.6, vec![6.6], vec![0.0]);
        assert_eq!(set.indices, vec![0]);
        let set = filter_relevant(1.0, vec![], vec![]);
        assert_eq!(set.indices, vec![0]);
    }

    #[test]
    fn relevant_set_on_data() {
        let x = with_noise(&[(0, |_| 0.0), (100, |_| 5.0), (200, |_| 5.5)], 300, 8, 0.05, 8);
        let cps = ChangePointSet::from_indices(300, vec![100, 200]).unwrap();
        let cfg = RelevantChangeConfig { delta: Tuning::Fixed(2.0), ..Default::default() };
        let set = relevant_set(&x, &cps, &cfg).unwrap();
        assert_eq!(set.indices, vec![0, 1]);
        assert_eq!(set.all_jumps.len(), 2);

        let none = ChangePointSet::from_indices(300, vec![]).unwrap();
        assert_eq!(relevant_set(&x, &none, &cfg).unwrap().indices, vec![0]);

        let bad = RelevantChangeConfig { beta: 1.0, ..cfg };
        assert!(relevant_set(&x, &cps, &bad).is_err());
        let bad = RelevantChangeConfig { delta: Tuning::Fixed(-1.0), ..cfg };
        assert!(relevant_set(&x, &cps, &bad).is_err());
    }

    #[test]
    fn bootstrap_mode_is_more_conservative() {
        let x = with_noise(&[(0, |_| 0.0), (150, |_| 1.0)], 300, 8, 1.0, 9);
        let cps = ChangePointSet::from_indices(300, vec![150]).unwrap();
        let plug = RelevantChangeConfig { delta: Tuning::Fixed(0.9), ..Default::default() };
        let boot = RelevantChangeConfig { mode: RelevanceMode::Bootstrap, calibration_replications: 400, ..plug };
        let a = relevant_set(&x, &cps, &plug).unwrap();
        let b = relevant_set(&x, &cps, &boot).unwrap();
        assert!(b.margins[0] > 0.0);
        assert!(b.indices.iter().all(|i| a.indices.contains(i)));
        assert_eq!(b.contains(1), b.all_jumps[0] > 0.9 + b.margins[0]);
    }
}
