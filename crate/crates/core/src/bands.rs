//! Simultaneous confidence bands `μ̂ᵢ(t) ± σ̂(t) · q / √n̂ᵢ` for the relevant segments.

use crate::error::{Error, Result};
use crate::fts::{Curve, Grid, Segment};
use crate::lrv::{Kernel, LrvEstimate};

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentEstimate {
    /// Segment index `i` in the estimated partition.
    pub index: usize,
    pub segment: Segment,
    pub n_hat: usize,
    pub mean: Curve,
}

impl SegmentEstimate {
    pub fn new(index: usize, segment: Segment, mean: Curve) -> Self {
        SegmentEstimate { index, n_hat: segment.len(), segment, mean }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub index: usize,
    pub segment: Segment,
    pub n_hat: usize,
    pub lower: Curve,
    pub center: Curve,
    pub upper: Curve,
    /// `σ̂(t) · q / √n̂`.
    pub half_width: Curve,
}

/// Run settings that produced a band set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BandMetadata {
    pub delta: f64,
    pub beta: f64,
    pub block_length: usize,
    pub bandwidth: usize,
    pub kernel: Option<Kernel>,
    pub seed: u64,
    pub quantile_level: f64,
    pub grid_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceBandSet {
    pub bands: Vec<Band>,
    pub quantile: f64,
    pub alpha: f64,
    pub metadata: BandMetadata,
}

impl ConfidenceBandSet {
    pub fn band(&self, index: usize) -> Option<&Band> {
        self.bands.iter().find(|b| b.index == index)
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }
}

pub fn build_bands(estimates: &[SegmentEstimate], lrv: &LrvEstimate, q: f64, alpha: f64) -> Result<ConfidenceBandSet> {
    if !(q >= 0.0 && q.is_finite()) {
        return Err(Error::invalid(format!("band quantile must be finite and nonnegative, got {q}")));
    }
    if lrv.sigma2.values().iter().any(|&v| v <= 0.0) {
        return Err(Error::invalid("variance estimate must be floored positive"));
    }
    let sigma = lrv.sigma();
    let grid = lrv.grid();
    let bands = estimates
        .iter()
        .map(|est| {
            if !Grid::same(est.mean.grid(), grid) {
                return Err(Error::invalid(format!("segment {} mean is on a different grid", est.index)));
            }
            if est.n_hat == 0 {
                return Err(Error::invalid(format!("segment {} is empty", est.index)));
            }
            let scale = q / (est.n_hat as f64).sqrt();
            let hw: Vec<f64> = sigma.iter().map(|s| s * scale).collect();
            let center = est.mean.values();
            let lower = center.iter().zip(&hw).map(|(c, h)| c - h).collect();
            let upper = center.iter().zip(&hw).map(|(c, h)| c + h).collect();
            Ok(Band {
                index: est.index,
                segment: est.segment,
                n_hat: est.n_hat,
                lower: Curve::new(grid.clone(), lower)?,
                center: est.mean.clone(),
                upper: Curve::new(grid.clone(), upper)?,
                half_width: Curve::new(grid.clone(), hw)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConfidenceBandSet {
        bands,
        quantile: q,
        alpha,
        metadata: BandMetadata { grid_size: grid.len(), ..Default::default() },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Containment {
    pub per_segment: Vec<bool>,
    pub overall: bool,
}

/// Whether every truth curve lies inside its band at every grid point.
///
/// `truth[k]` is compared with `bands.bands[k]`.
pub fn check_containment(bands: &ConfidenceBandSet, truth: &[Curve]) -> Result<Containment> {
    if truth.len() != bands.bands.len() {
        return Err(Error::invalid(format!(
            "{} truth curves for {} bands",
            truth.len(),
            bands.bands.len()
        )));
    }
    let per_segment = bands
        .bands
        .iter()
        .zip(truth)
        .map(|(band, mu)| {
            if !Grid::same(band.center.grid(), mu.grid()) {
                return Err(Error::invalid("truth curve is on a different grid than its band"));
            }
            Ok(band
                .lower
                .values()
                .iter()
                .zip(mu.values())
                .zip(band.upper.values())
                .all(|((lo, m), up)| lo <= m && m <= up))
        })
        .collect::<Result<Vec<_>>>()?;
    let overall = per_segment.iter().all(|&b| b);
    Ok(Containment { per_segment, overall })
}
