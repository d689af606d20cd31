//! Pointwise long-run variance of a functional time series.
//!
//! ```text
//! σ̂²(t)   = Σ_{l=-c}^{c} K(l/c) · σ̂²_l(t)
//! σ̂²_l(t) = (1/n) Σ_j (X_j(t) − μ̂⁽ʲ⁾(t)) · (X_{j+l}(t) − μ̂⁽ʲ⁾(t))
//! ```
//!
//! where `μ̂⁽ʲ⁾` is the mean of the segment containing `j`. Both factors are
//! centered by the mean of the *first* index `j`, including products whose
//! lag window crosses a segment boundary. Only the diagonal `σ²(t)` is
//! estimated; the full covariance operator is never formed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fts::{Curve, FunctionalTimeSeries, Grid, SegmentMeans};
use crate::tuning::Tuning;

/// Relative variance floor: values below `VARIANCE_FLOOR * max_t σ̂²(t)` are raised to it.
pub const VARIANCE_FLOOR: f64 = 1e-8;

/// Lag-window kernels. All satisfy `K(0) = 1`, `K(±1) = 0`, `K = 0` outside `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// `1 − |x|`.
    Bartlett,
    Parzen,
    /// Trapezoid: 1 on `|x| ≤ 1/2`, then linear down to 0 at `|x| = 1`.
    #[default]
    FlatTop,
}

impl Kernel {
    pub fn weight(self, x: f64) -> f64 {
        let a = x.abs();
        if a >= 1.0 {
            return 0.0;
        }
        match self {
            Kernel::Bartlett => 1.0 - a,
            Kernel::Parzen => {
                if a <= 0.5 {
                    1.0 - 6.0 * a * a + 6.0 * a * a * a
                } else {
                    2.0 * (1.0 - a).powi(3)
                }
            }
            Kernel::FlatTop => {
                if a <= 0.5 {
                    1.0
                } else {
                    2.0 * (1.0 - a)
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Bartlett => "bartlett",
            Kernel::Parzen => "parzen",
            Kernel::FlatTop => "flat_top",
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "bartlett" => Ok(Kernel::Bartlett),
            "parzen" => Ok(Kernel::Parzen),
            "flat_top" | "flattop" => Ok(Kernel::FlatTop),
            other => Err(format!("unknown kernel {other:?} (bartlett, parzen, flat_top)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct LrvConfig {
    /// Bandwidth `c`; `auto` uses [`auto_bandwidth`].
    pub bandwidth: Tuning<usize>,
    pub kernel: Kernel,
}

#[derive(Debug, Clone)]
pub struct LrvEstimate {
    /// Floored `σ̂²(t)`.
    pub sigma2: Curve,
    /// `σ̂²_l` for `l = -c..=c`; entry `l + c`. Empty when `σ̂²` was supplied directly.
    pub lag_covs: Vec<Curve>,
    pub bandwidth: usize,
    pub kernel: Kernel,
    /// Absolute floor applied to `σ̂²`.
    pub floor: f64,
    /// Grid points raised to the floor.
    pub floored_points: usize,
    pub warnings: Vec<String>,
}

impl LrvEstimate {
    /// Wraps a known variance function (used when `σ²` is given rather than estimated).
    pub fn from_sigma2(sigma2: Curve) -> Result<Self> {
        if sigma2.values().iter().any(|&v| v <= 0.0) {
            return Err(Error::invalid("a supplied variance function must be positive"));
        }
        Ok(LrvEstimate {
            sigma2,
            lag_covs: Vec::new(),
            bandwidth: 0,
            kernel: Kernel::default(),
            floor: 0.0,
            floored_points: 0,
            warnings: Vec::new(),
        })
    }

    /// `σ̂²_l`, when recorded.
    pub fn lag_cov(&self, l: isize) -> Option<&Curve> {
        let idx = l + self.bandwidth as isize;
        if self.lag_covs.is_empty() || idx < 0 {
            return None;
        }
        self.lag_covs.get(idx as usize)
    }

    /// Pointwise `σ̂(t)`.
    pub fn sigma(&self) -> Vec<f64> {
        self.sigma2.values().iter().map(|v| v.sqrt()).collect()
    }

    pub fn grid(&self) -> &std::sync::Arc<Grid> {
        self.sigma2.grid()
    }
}

/// `max(1, ⌊n^{1/4}⌋)`, so that `c → ∞` and `c³/n → 0`.
pub fn auto_bandwidth(n: usize) -> usize {
    floor_root(n as u64, 4).max(1) as usize
}

/// Exact `⌊n^{1/k}⌋` for small `k`.
pub(crate) fn floor_root(n: u64, k: u32) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    let pow = |b: u64| b.checked_pow(k);
    while r > 0 && pow(r).is_none_or(|p| p > n) {
        r -= 1;
    }
    while pow(r + 1).is_some_and(|p| p <= n) {
        r += 1;
    }
    r
}

/// Empirical lag-`l` covariance curve `σ̂²_l` with divisor `n`.
pub fn lag_covariance(x: &FunctionalTimeSeries, means: &SegmentMeans, l: isize) -> Result<Curve> {
    let n = x.len();
    if means.partition().n() != n {
        return Err(Error::invalid("segment means do not match the series length"));
    }
    if l.unsigned_abs() >= n {
        return Err(Error::invalid(format!("lag {l} requires |l| < n = {n}")));
    }
    let mut acc = vec![0.0; x.grid_len()];
    let (from, to) = if l >= 0 { (0, n - l as usize) } else { (l.unsigned_abs(), n) };
    for j in from..to {
        let mu = means.mean_for(j)?.values();
        let lagged = x.row((j as isize + l) as usize);
        for (((a, xj), xl), m) in acc.iter_mut().zip(x.row(j)).zip(lagged).zip(mu) {
            *a += (xj - m) * (xl - m);
        }
    }
    let nf = n as f64;
    acc.iter_mut().for_each(|a| *a /= nf);
    Ok(Curve::from_parts(x.grid().clone(), acc))
}

/// Lag-window long-run variance estimate with variance floor.
pub fn estimate_lrv(x: &FunctionalTimeSeries, means: &SegmentMeans, cfg: &LrvConfig) -> Result<LrvEstimate> {
    let n = x.len();
    let c = cfg.bandwidth.resolve(|| auto_bandwidth(n));
    if c == 0 {
        return Err(Error::invalid("bandwidth must be at least 1"));
    }
    if c >= n {
        return Err(Error::invalid(format!("bandwidth {c} requires c < n = {n}")));
    }
    let mut warnings = Vec::new();
    if (c as f64).powi(3) >= n as f64 {
        let msg = format!("bandwidth c = {c} has c^3/n >= 1 at n = {n}; the estimate may be inconsistent");
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let ci = c as isize;
    let lag_covs = (-ci..=ci)
        .map(|l| lag_covariance(x, means, l))
        .collect::<Result<Vec<_>>>()?;

    let mut sigma2 = vec![0.0; x.grid_len()];
    for (l, cov) in (-ci..=ci).zip(&lag_covs) {
        let w = cfg.kernel.weight(l as f64 / c as f64);
        if w == 0.0 {
            continue;
        }
        for (s, v) in sigma2.iter_mut().zip(cov.values()) {
            *s += w * v;
        }
    }
    let (floor, floored_points) = apply_floor(&mut sigma2);
    Ok(LrvEstimate {
        sigma2: Curve::from_parts(x.grid().clone(), sigma2),
        lag_covs,
        bandwidth: c,
        kernel: cfg.kernel,
        floor,
        floored_points,
        warnings,
    })
}

/// Raises values below `VARIANCE_FLOOR * max` to that level. Returns the floor and the count raised.
pub(crate) fn apply_floor(values: &mut [f64]) -> (f64, usize) {
    let max = values.iter().cloned().fold(0.0_f64, f64::max);
    let floor = if max > 0.0 { VARIANCE_FLOOR * max } else { f64::MIN_POSITIVE };
    let mut raised = 0;
    for v in values.iter_mut() {
        if *v < floor {
            *v = floor;
            raised += 1;
        }
    }
    (floor, raised)
}
