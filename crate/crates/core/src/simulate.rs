//! Synthetic functional time series with known truth, and the Monte Carlo
//! coverage harness built on top of them.
//!
//! Observations are `X_j(t) = μ_{seg(j)}(t) + ε_j(t)`. Innovations are smooth
//! random curves
//!
//! ```text
//! η_j(t) = τ(t) / √(Σ k⁻²) · Σ_{k=1}^{K} k⁻¹ (Z_{jk} sin(kπt) + Z'_{jk} cos(kπt))
//! ```
//!
//! with iid standard normal `Z, Z'`. Since `sin² + cos² = 1`, the pointwise
//! variance is exactly `τ²(t)`, including the endpoints. Temporal dependence
//! is a scalar recursion applied at every `t`, so the long-run variance has a
//! closed form.

use std::f64::consts::PI;
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::check_containment;
use crate::error::{Error, Result};
use crate::fts::{Curve, FunctionalTimeSeries, Grid, Partition};
use crate::pipeline::{analyze, PipelineConfig};
use crate::rng;
use crate::segmentation::auto_delta;
use crate::tuning::Tuning;

/// Number of basis functions in each innovation.
pub const BASIS_SIZE: usize = 20;
/// Steps discarded before the first AR(1) observation.
pub const AR_BURN_IN: usize = 100;

/// Scalar dependence applied pointwise to the innovations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorProcess {
    #[default]
    Iid,
    /// `ε_j = η_j + θ η_{j−1}`.
    Ma1 { theta: f64 },
    /// `ε_j = ρ ε_{j−1} + η_j`.
    Ar1 { rho: f64 },
}


impl ErrorProcess {
    fn validate(self) -> Result<()> {
        match self {
            ErrorProcess::Iid => Ok(()),
            ErrorProcess::Ma1 { theta } if theta.is_finite() => Ok(()),
            ErrorProcess::Ar1 { rho } if rho.abs() < 1.0 => Ok(()),
            other => Err(Error::invalid(format!("invalid error process {other:?}"))),
        }
    }

    /// Long-run variance per unit innovation variance.
    pub fn long_run_factor(self) -> f64 {
        match self {
            ErrorProcess::Iid => 1.0,
            ErrorProcess::Ma1 { theta } => (1.0 + theta) * (1.0 + theta),
            ErrorProcess::Ar1 { rho } => 1.0 / ((1.0 - rho) * (1.0 - rho)),
        }
    }

    /// Lag-`l` autocovariance per unit innovation variance.
    pub fn autocovariance_factor(self, lag: usize) -> f64 {
        match (self, lag) {
            (ErrorProcess::Iid, 0) => 1.0,
            (ErrorProcess::Iid, _) => 0.0,
            (ErrorProcess::Ma1 { theta }, 0) => 1.0 + theta * theta,
            (ErrorProcess::Ma1 { theta }, 1) => theta,
            (ErrorProcess::Ma1 { .. }, _) => 0.0,
            (ErrorProcess::Ar1 { rho }, l) => rho.powi(l as i32) / (1.0 - rho * rho),
        }
    }
}

/// Generates error curves for a fixed grid and innovation variance.
#[derive(Debug, Clone)]
pub struct NoiseGenerator {
    process: ErrorProcess,
    grid: Arc<Grid>,
    // BASIS_SIZE x T each, already scaled by τ(t) / √(Σ k⁻²) · k⁻¹.
    sin_basis: Vec<f64>,
    cos_basis: Vec<f64>,
}

impl NoiseGenerator {
    pub fn new(process: ErrorProcess, innovation_variance: &Curve) -> Result<Self> {
        process.validate()?;
        if innovation_variance.values().iter().any(|&v| v < 0.0) {
            return Err(Error::invalid("innovation variance must be nonnegative"));
        }
        let grid = innovation_variance.grid().clone();
        let norm: f64 = (1..=BASIS_SIZE).map(|k| 1.0 / (k * k) as f64).sum::<f64>().sqrt();
        let t = grid.len();
        let mut sin_basis = Vec::with_capacity(BASIS_SIZE * t);
        let mut cos_basis = Vec::with_capacity(BASIS_SIZE * t);
        for k in 1..=BASIS_SIZE {
            let kf = k as f64;
            for (&p, &v) in grid.points().iter().zip(innovation_variance.values()) {
                let amp = v.sqrt() / (norm * kf);
                sin_basis.push(amp * (kf * PI * p).sin());
                cos_basis.push(amp * (kf * PI * p).cos());
            }
        }
        Ok(NoiseGenerator { process, grid, sin_basis, cos_basis })
    }

    pub fn process(&self) -> ErrorProcess {
        self.process
    }

    fn innovation(&self, rng: &mut impl rand::Rng, out: &mut [f64]) {
        let t = self.grid.len();
        out.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..BASIS_SIZE {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            let s = &self.sin_basis[k * t..(k + 1) * t];
            let c = &self.cos_basis[k * t..(k + 1) * t];
            for ((o, si), ci) in out.iter_mut().zip(s).zip(c) {
                *o += a * si + b * ci;
            }
        }
    }

    /// `n` error curves, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<FunctionalTimeSeries> {
        if n == 0 {
            return Err(Error::invalid("cannot sample an empty series"));
        }
        let t = self.grid.len();
        let mut rng = rng::stream(seed, 0);
        let mut data = vec![0.0; n * t];
        let mut eta = vec![0.0; t];
        match self.process {
            ErrorProcess::Iid => {
                for row in data.chunks_exact_mut(t) {
                    self.innovation(&mut rng, row);
                }
            }
            ErrorProcess::Ma1 { theta } => {
                let mut prev = vec![0.0; t];
                self.innovation(&mut rng, &mut prev);
                for row in data.chunks_exact_mut(t) {
                    self.innovation(&mut rng, &mut eta);
                    for ((o, e), p) in row.iter_mut().zip(&eta).zip(&prev) {
                        *o = e + theta * p;
                    }
                    std::mem::swap(&mut prev, &mut eta);
                }
            }
            ErrorProcess::Ar1 { rho } => {
                let mut state = vec![0.0; t];
                for _ in 0..AR_BURN_IN {
                    self.innovation(&mut rng, &mut eta);
                    for (s, e) in state.iter_mut().zip(&eta) {
                        *s = rho * *s + e;
                    }
                }
                for row in data.chunks_exact_mut(t) {
                    self.innovation(&mut rng, &mut eta);
                    for (s, e) in state.iter_mut().zip(&eta) {
                        *s = rho * *s + e;
                    }
                    row.copy_from_slice(&state);
                }
            }
        }
        FunctionalTimeSeries::from_matrix(self.grid.clone(), data)
    }
}

/// Closed-form mean curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveSpec {
    Constant { value: f64 },
    Linear { intercept: f64, slope: f64 },
    /// `offset + amplitude · sin(2π · frequency · t + phase)`.
    Sine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Triangle of height `peak` centred at `center`, zero beyond `half_width`.
    Hat { peak: f64, center: f64, half_width: f64 },
    /// Explicit grid values.
    Values { values: Vec<f64> },
}

impl CurveSpec {
    pub fn sample(&self, grid: &Arc<Grid>) -> Result<Curve> {
        match self {
            CurveSpec::Constant { value } => Curve::constant(grid.clone(), *value),
            CurveSpec::Linear { intercept, slope } => Curve::from_fn(grid.clone(), |t| intercept + slope * t),
            CurveSpec::Sine { amplitude, frequency, phase, offset } => {
                Curve::from_fn(grid.clone(), |t| offset + amplitude * (2.0 * PI * frequency * t + phase).sin())
            }
            CurveSpec::Hat { peak, center, half_width } => {
                if !(*half_width > 0.0) {
                    return Err(Error::invalid("hat half_width must be positive"));
                }
                Curve::from_fn(grid.clone(), |t| peak * (1.0 - (t - center).abs() / half_width).max(0.0))
            }
            CurveSpec::Values { values } => Curve::new(grid.clone(), values.clone()),
        }
    }
}

/// A data-generating scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub n: usize,
    pub grid_size: usize,
    /// Mean of each segment; one more entry than `change_locations`.
    pub means: Vec<CurveSpec>,
    /// Rescaled change locations in `(0, 1)`, increasing.
    #[serde(default)]
    pub change_locations: Vec<f64>,
    #[serde(default)]
    pub error: ErrorProcess,
    /// Pointwise innovation variance `τ²(t)`.
    pub innovation_variance: CurveSpec,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn change_indices(&self) -> Vec<usize> {
        self.change_locations
            .iter()
            .map(|s| (s * self.n as f64).floor() as usize)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.means.len() != self.change_locations.len() + 1 {
            return Err(Error::invalid(format!(
                "{} mean curves for {} changes; need one more mean than changes",
                self.means.len(),
                self.change_locations.len()
            )));
        }
        if self.change_locations.iter().any(|s| !(*s > 0.0 && *s < 1.0)) {
            return Err(Error::invalid("change locations must lie in (0, 1)"));
        }
        if self.n == 0 || self.grid_size == 0 {
            return Err(Error::invalid("scenario needs n >= 1 and grid_size >= 1"));
        }
        self.error.validate()
    }
}

/// Ground truth of a generated scenario.
#[derive(Debug, Clone)]
pub struct Truth {
    pub means: Vec<Curve>,
    pub partition: Partition,
    pub locations: Vec<f64>,
    /// `‖μᵢ − μᵢ₋₁‖∞` on the grid for `i = 1..=m`.
    pub jump_sizes: Vec<f64>,
    /// Analytic long-run variance `σ²(t)`.
    pub long_run_variance: Curve,
}

impl Truth {
    /// True relevant set `{0} ∪ {i : jump_i > Δ}`.
    pub fn relevant(&self, delta: f64) -> Vec<usize> {
        std::iter::once(0)
            .chain(self.jump_sizes.iter().enumerate().filter(|(_, &j)| j > delta).map(|(i, _)| i + 1))
            .collect()
    }

    /// Noise-free series `X_j = μ_{seg(j)}`.
    pub fn mean_series(&self) -> Result<FunctionalTimeSeries> {
        let curves = (0..self.partition.n())
            .map(|j| self.means[self.partition.segment_of(j).unwrap_or(0)].clone())
            .collect();
        FunctionalTimeSeries::from_curves(curves)
    }
}

/// Draws a series and its ground truth. Deterministic in `spec.seed`.
pub fn generate(spec: &ScenarioSpec) -> Result<(FunctionalTimeSeries, Truth)> {
    generate_replicate(spec, spec.seed)
}

fn generate_replicate(spec: &ScenarioSpec, seed: u64) -> Result<(FunctionalTimeSeries, Truth)> {
    spec.validate()?;
    let grid = Grid::uniform(spec.grid_size)?;
    let partition = Partition::new(spec.n, spec.change_indices())?;
    let means = spec.means.iter().map(|m| m.sample(&grid)).collect::<Result<Vec<_>>>()?;
    let tau2 = spec.innovation_variance.sample(&grid)?;
    let noise = NoiseGenerator::new(spec.error, &tau2)?.sample(spec.n, seed)?;
    let x = noise.map_rows(|j, row| {
        let mu = means[partition.segment_of(j).unwrap_or(0)].values();
        for (v, m) in row.iter_mut().zip(mu) {
            *v += m;
        }
    })?;
    let jump_sizes = means
        .windows(2)
        .map(|w| w[1].sub(&w[0]).map(|d| d.sup_norm()))
        .collect::<Result<Vec<_>>>()?;
    let long_run_variance = tau2.scale(spec.error.long_run_factor());
    let truth = Truth {
        means,
        locations: partition.cuts().iter().map(|&k| k as f64 / spec.n as f64).collect(),
        partition,
        jump_sizes,
        long_run_variance,
    };
    Ok((x, truth))
}

/// Outcome of one coverage replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub seed: u64,
    /// `None` when the pipeline failed.
    pub contained: Option<bool>,
    pub error: Option<String>,
    pub estimated_changes: usize,
    pub relevant_match: bool,
    /// `mean |ŝᵢ − sᵢ|` when the number of changes is right.
    pub location_error: Option<f64>,
    pub quantile: f64,
    /// Mean band half-width over bands and grid points.
    pub mean_half_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub replications: usize,
    pub outcomes: Vec<ReplicationOutcome>,
    pub failures: usize,
    /// Fraction of successful replications whose bands contained the truth.
    pub coverage: f64,
    pub mean_half_width: f64,
    /// Rate of `m̂ = m`.
    pub change_count_rate: f64,
    /// Rate of `Î = I`.
    pub relevant_set_rate: f64,
    /// Mean of `mean |ŝᵢ − sᵢ|` over replications with `m̂ = m`.
    pub mean_location_error: f64,
}

impl CoverageReport {
    pub fn containment(&self) -> Vec<bool> {
        self.outcomes.iter().filter_map(|o| o.contained).collect()
    }
}

/// Seed of replication `r` of a study.
pub fn replication_seed(base: u64, r: usize) -> u64 {
    rng::derive_seed(base, r as u64)
}

/// Runs the pipeline on `replications` independent draws of `spec` and checks
/// the bands against the true means of the truly relevant segments.
///
/// Bootstrap seeds are derived from the replication seed. A replication whose
/// estimated relevant set has a different size than the true one counts as
/// not contained. Pipeline errors are recorded; more than 5% failed
/// replications fail the study.
pub fn run_coverage_study(spec: &ScenarioSpec, cfg: &PipelineConfig, replications: usize) -> Result<CoverageReport> {
    if replications == 0 {
        return Err(Error::invalid("a coverage study needs at least one replication"));
    }
    spec.validate()?;
    let delta = match cfg.relevance.delta {
        Tuning::Fixed(d) => d,
        Tuning::Auto => {
            let (_, truth) = generate_replicate(spec, spec.seed)?;
            auto_delta(&truth.mean_series()?, &cfg.relevance)?
        }
    };

    let outcomes: Vec<ReplicationOutcome> = (0..replications)
        .into_par_iter()
        .map(|r| replicate(spec, cfg, delta, replication_seed(spec.seed, r)))
        .collect::<Result<Vec<_>>>()?;

    let failures = outcomes.iter().filter(|o| o.contained.is_none()).count();
    if failures as f64 > 0.05 * replications as f64 {
        let first = outcomes.iter().find_map(|o| o.error.clone()).unwrap_or_default();
        return Err(Error::invalid(format!(
            "{failures} of {replications} replications failed (first error: {first})"
        )));
    }
    let ok: Vec<&ReplicationOutcome> = outcomes.iter().filter(|o| o.contained.is_some()).collect();
    let rate = |f: &dyn Fn(&ReplicationOutcome) -> bool| {
        if ok.is_empty() {
            0.0
        } else {
            ok.iter().filter(|o| f(o)).count() as f64 / ok.len() as f64
        }
    };
    let true_changes = spec.change_locations.len();
    let loc: Vec<f64> = ok.iter().filter_map(|o| o.location_error).collect();
    Ok(CoverageReport {
        replications,
        failures,
        coverage: rate(&|o| o.contained == Some(true)),
        mean_half_width: mean(ok.iter().map(|o| o.mean_half_width)),
        change_count_rate: rate(&|o| o.estimated_changes == true_changes),
        relevant_set_rate: rate(&|o| o.relevant_match),
        mean_location_error: if loc.is_empty() { f64::NAN } else { mean(loc.into_iter()) },
        outcomes,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if c == 0 {
        f64::NAN
    } else {
        s / c as f64
    }
}

fn replicate(spec: &ScenarioSpec, cfg: &PipelineConfig, delta: f64, seed: u64) -> Result<ReplicationOutcome> {
    // Generator errors are scenario errors and abort the study.
    let (x, truth) = generate_replicate(spec, seed)?;
    let mut run_cfg = *cfg;
    run_cfg.bootstrap.seed = rng::derive_seed(seed, 1);
    run_cfg.relevance.calibration_seed = rng::derive_seed(seed, 2);

    let analysis = match analyze(&x, &run_cfg) {
        Ok(a) => a,
        Err(e) => {
            return Ok(ReplicationOutcome {
                seed,
                contained: None,
                error: Some(e.to_string()),
                estimated_changes: 0,
                relevant_match: false,
                location_error: None,
                quantile: f64::NAN,
                mean_half_width: f64::NAN,
            })
        }
    };
    let cps = &analysis.change_points;
    let location_error = (cps.len() == truth.locations.len() && !cps.is_empty()).then(|| {
        mean(cps.locations.iter().zip(&truth.locations).map(|(a, b)| (a - b).abs()))
    });
    let true_relevant = truth.relevant(delta);
    let relevant_match = cps.len() == truth.locations.len() && analysis.relevant.indices == true_relevant;

    // Pair estimated and true relevant segments in order.
    let contained = if analysis.bands.len() == true_relevant.len() {
        let truth_curves: Vec<Curve> = true_relevant.iter().map(|&i| truth.means[i].clone()).collect();
        check_containment(&analysis.bands, &truth_curves)?.overall
    } else {
        false
    };
    let widths = analysis.bands.bands.iter().flat_map(|b| b.half_width.values().iter().copied());
    Ok(ReplicationOutcome {
        seed,
        contained: Some(contained),
        error: None,
        estimated_changes: cps.len(),
        relevant_match,
        location_error,
        quantile: analysis.bands.quantile,
        mean_half_width: mean(widths),
    })
}
