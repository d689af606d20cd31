//! Discretized functional time series.
//!
//! Every curve lives on a shared [`Grid`] of `T` phase points in `[0, 1]`.
//! A [`FunctionalTimeSeries`] stores `n` such curves contiguously (row `j` is
//! the `j`-th observation in time order). Segments use the half-open index
//! convention `[start, end)`, so a change located at rescaled position `s`
//! starts its segment at index `floor(n * s)`.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Ordered sample locations shared by all curves of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    /// Uniform grid `t_k = k / (T - 1)`. A single-point grid sits at `t = 0`.
    pub fn uniform(size: usize) -> Result<Arc<Grid>> {
        match size {
            0 => Err(Error::invalid("grid needs at least one point")),
            1 => Ok(Arc::new(Grid { points: vec![0.0] })),
            _ => {
                let last = (size - 1) as f64;
                let points = (0..size).map(|k| k as f64 / last).collect();
                Ok(Arc::new(Grid { points }))
            }
        }
    }

    pub fn new(points: Vec<f64>) -> Result<Arc<Grid>> {
        if points.is_empty() {
            return Err(Error::invalid("grid needs at least one point"));
        }
        if points.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("grid points must lie in [0, 1]"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("grid points must be strictly increasing"));
        }
        Ok(Arc::new(Grid { points }))
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when both handles describe the same sample locations.
    pub fn same(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
        Arc::ptr_eq(a, b) || a.points == b.points
    }
}

/// A function sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Curve {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "curve has {} values but grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite curve value at grid index {k}")));
        }
        Ok(Curve { grid, values })
    }

    pub fn constant(grid: Arc<Grid>, value: f64) -> Result<Self> {
        let values = vec![value; grid.len()];
        Curve::new(grid, values)
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&t| f(t)).collect();
        Curve::new(grid, values)
    }

    // Construction for values already known to be finite and grid-sized.
    pub(crate) fn from_parts(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Curve { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Maximum absolute value over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    fn check_grid(&self, other: &Curve) -> Result<()> {
        if Grid::same(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::invalid("curves are sampled on different grids"))
        }
    }

    pub fn sub(&self, other: &Curve) -> Result<Curve> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Curve::from_parts(self.grid.clone(), values))
    }

    pub fn add(&self, other: &Curve) -> Result<Curve> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Curve::from_parts(self.grid.clone(), values))
    }

    pub fn scale(&self, factor: f64) -> Curve {
        let values = self.values.iter().map(|v| v * factor).collect();
        Curve::from_parts(self.grid.clone(), values)
    }
}

/// Maximum absolute value of a sampled function.
pub fn sup_norm(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("sup-norm of an empty curve"));
    }
    Ok(values.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// `n` curves on one grid, in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalTimeSeries {
    grid: Arc<Grid>,
    // Row-major n x T.
    data: Vec<f64>,
}

impl FunctionalTimeSeries {
    pub fn from_curves(curves: Vec<Curve>) -> Result<Self> {
        let first = curves
            .first()
            .ok_or_else(|| Error::invalid("a functional time series needs at least one curve"))?;
        let grid = first.grid.clone();
        let mut data = Vec::with_capacity(curves.len() * grid.len());
        for (j, c) in curves.iter().enumerate() {
            if !Grid::same(&grid, &c.grid) {
                return Err(Error::invalid(format!("curve {j} is on a different grid")));
            }
            data.extend_from_slice(&c.values);
        }
        Ok(FunctionalTimeSeries { grid, data })
    }

    /// Builds a series from raw rows, each of grid length.
    pub fn from_rows(grid: Arc<Grid>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let curves = rows
            .into_iter()
            .map(|r| Curve::new(grid.clone(), r))
            .collect::<Result<Vec<_>>>()?;
        Self::from_curves(curves)
    }

    /// Builds a series from a row-major `n x T` buffer.
    pub fn from_matrix(grid: Arc<Grid>, data: Vec<f64>) -> Result<Self> {
        let t = grid.len();
        if data.is_empty() || !data.len().is_multiple_of(t) {
            return Err(Error::invalid(format!(
                "buffer of length {} is not a nonempty multiple of the grid size {t}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite value in series"));
        }
        Ok(FunctionalTimeSeries { grid, data })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Number of curves `n`.
    pub fn len(&self) -> usize {
        self.data.len() / self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn grid_len(&self) -> usize {
        self.grid.len()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let t = self.grid.len();
        &self.data[j * t..(j + 1) * t]
    }

    pub fn curve(&self, j: usize) -> Curve {
        Curve::from_parts(self.grid.clone(), self.row(j).to_vec())
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.grid.len())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Applies `f(j, row)` to every observation.
    pub fn map_rows(&self, mut f: impl FnMut(usize, &mut [f64])) -> Result<Self> {
        let mut data = self.data.clone();
        for (j, row) in data.chunks_exact_mut(self.grid.len()).enumerate() {
            f(j, row);
        }
        Self::from_matrix(self.grid.clone(), data)
    }

    /// Same observations with grid points reordered by `perm` (new k takes old `perm[k]`).
    /// The grid itself is left untouched; used to check grid-order invariance.
    pub fn permute_grid(&self, perm: &[usize]) -> Result<Self> {
        let t = self.grid.len();
        if perm.len() != t {
            return Err(Error::invalid("permutation length differs from grid size"));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.rows() {
            data.extend(perm.iter().map(|&k| row[k]));
        }
        Self::from_matrix(self.grid.clone(), data)
    }
}

/// Half-open index range `[start, end)` of a series of length `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    /// `(start / n, end / n)`.
    pub rescaled_bounds: (f64, f64),
}

impl Segment {
    pub fn new(start: usize, end: usize, n: usize) -> Result<Self> {
        if end <= start {
            return Err(Error::invalid(format!("empty segment [{start}, {end})")));
        }
        if end > n {
            return Err(Error::invalid(format!("segment [{start}, {end}) exceeds series length {n}")));
        }
        let nf = n as f64;
        Ok(Segment {
            start,
            end,
            rescaled_bounds: (start as f64 / nf, end as f64 / nf),
        })
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn contains(&self, j: usize) -> bool {
        (self.start..self.end).contains(&j)
    }
}

/// Pointwise arithmetic mean of the curves with indices in `seg`.
///
/// Accumulates deviations from the first curve of the segment, so a segment
/// of identical curves returns that curve bit-for-bit.
pub fn segment_mean(x: &FunctionalTimeSeries, seg: &Segment) -> Result<Curve> {
    if seg.end <= seg.start {
        return Err(Error::invalid("mean over an empty segment"));
    }
    if seg.end > x.len() {
        return Err(Error::invalid(format!(
            "segment [{}, {}) exceeds series length {}",
            seg.start,
            seg.end,
            x.len()
        )));
    }
    let pivot = x.row(seg.start);
    let mut acc = vec![0.0; x.grid_len()];
    for j in seg.start + 1..seg.end {
        for ((a, v), p) in acc.iter_mut().zip(x.row(j)).zip(pivot) {
            *a += v - p;
        }
    }
    let count = seg.len() as f64;
    let values = pivot.iter().zip(&acc).map(|(p, a)| p + a / count).collect();
    Ok(Curve::from_parts(x.grid().clone(), values))
}

/// A partition of `0..n` into consecutive segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    n: usize,
    // Segment starts after the first; strictly increasing, each in (0, n).
    cuts: Vec<usize>,
}

impl Partition {
    pub fn new(n: usize, cuts: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("partition of an empty series"));
        }
        if cuts.iter().any(|&c| c == 0 || c >= n) {
            return Err(Error::invalid("change indices must lie strictly inside the series"));
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("change indices must be strictly increasing"));
        }
        Ok(Partition { n, cuts })
    }

    pub fn single(n: usize) -> Result<Self> {
        Partition::new(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cuts(&self) -> &[usize] {
        &self.cuts
    }

    pub fn num_segments(&self) -> usize {
        self.cuts.len() + 1
    }

    pub fn segment(&self, i: usize) -> Segment {
        let start = if i == 0 { 0 } else { self.cuts[i - 1] };
        let end = self.cuts.get(i).copied().unwrap_or(self.n);
        Segment::new(start, end, self.n).expect("partition segments are valid by construction")
    }

    pub fn segments(&self) -> Vec<Segment> {
        (0..self.num_segments()).map(|i| self.segment(i)).collect()
    }

    /// Index of the segment containing observation `j`.
    pub fn segment_of(&self, j: usize) -> Option<usize> {
        (j < self.n).then(|| self.cuts.partition_point(|&c| c <= j))
    }
}

/// Segment means attached to a partition, giving the centering mean of every index.
#[derive(Debug, Clone)]
pub struct SegmentMeans {
    partition: Partition,
    means: Vec<Curve>,
}

impl SegmentMeans {
    pub fn estimate(x: &FunctionalTimeSeries, partition: Partition) -> Result<Self> {
        if partition.n() != x.len() {
            return Err(Error::invalid("partition length differs from series length"));
        }
        let means = partition
            .segments()
            .iter()
            .map(|s| segment_mean(x, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(SegmentMeans { partition, means })
    }

    pub fn from_parts(partition: Partition, means: Vec<Curve>) -> Result<Self> {
        if means.len() != partition.num_segments() {
            return Err(Error::invalid("need exactly one mean per segment"));
        }
        Ok(SegmentMeans { partition, means })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn means(&self) -> &[Curve] {
        &self.means
    }

    /// The mean assigned to observation `j`.
    pub fn mean_for(&self, j: usize) -> Result<&Curve> {
        self.partition
            .segment_of(j)
            .map(|i| &self.means[i])
            .ok_or_else(|| Error::Invariant(format!("index {j} has no assigned segment")))
    }
}
