//! Monte Carlo properties of the generators, estimators and the full pipeline.

use fts_bands::bootstrap::{center_residuals, run_bootstrap, BootstrapConfig};
use fts_bands::lrv::{estimate_lrv, Kernel, LrvConfig};
use fts_bands::pipeline::PipelineConfig;
use fts_bands::segmentation::{auto_delta, detect_change_points, relevant_set, RelevantChangeConfig, SegmentationConfig};
use fts_bands::simulate::{generate, run_coverage_study, CurveSpec, ErrorProcess, NoiseGenerator, ScenarioSpec};
use fts_bands::{Curve, FunctionalTimeSeries, Grid, Partition, SegmentMeans, Tuning};

fn ar_noise(rho: f64, n: usize, t: usize, seed: u64) -> FunctionalTimeSeries {
    let tau2 = Curve::constant(Grid::uniform(t).unwrap(), 1.0).unwrap();
    NoiseGenerator::new(ErrorProcess::Ar1 { rho }, &tau2).unwrap().sample(n, seed).unwrap()
}

fn single_means(x: &FunctionalTimeSeries) -> SegmentMeans {
    SegmentMeans::estimate(x, Partition::single(x.len()).unwrap()).unwrap()
}

/// Sample autocovariance at one grid column, centered by the column mean, divisor n.
fn autocov(x: &FunctionalTimeSeries, k: usize, lag: usize) -> f64 {
    let col: Vec<f64> = x.rows().map(|r| r[k]).collect();
    let n = col.len();
    let mean = col.iter().sum::<f64>() / n as f64;
    (0..n - lag).map(|j| (col[j] - mean) * (col[j + lag] - mean)).sum::<f64>() / n as f64
}

/// Bartlett's asymptotic variance of the lag-`lag` sample autocovariance for a Gaussian process.
fn autocov_variance(gamma: impl Fn(i64) -> f64, lag: i64, n: usize) -> f64 {
    (-400..=400)
        .map(|h| gamma(h) * gamma(h + lag) + gamma(h + lag) * gamma(h - lag))
        .sum::<f64>()
        / n as f64
}

fn check_stationarity(process: ErrorProcess, gamma: impl Fn(i64) -> f64 + Copy) {
    let n = 10_000;
    let tau2 = Curve::constant(Grid::uniform(21).unwrap(), 1.0).unwrap();
    let x = NoiseGenerator::new(process, &tau2).unwrap().sample(n, 2024).unwrap();
    for k in [0, 10, 20] {
        for lag in [0usize, 1] {
            let est = autocov(&x, k, lag);
            let se = autocov_variance(gamma, lag as i64, n).sqrt();
            let truth = gamma(lag as i64);
            assert!(
                (est - truth).abs() <= 3.0 * se,
                "{process:?} column {k} lag {lag}: {est} vs {truth} (se {se})"
            );
        }
    }
}

#[test]
fn ar1_generator_matches_analytic_autocovariance() {
    let rho: f64 = 0.4;
    let gamma = move |h: i64| rho.powi(h.unsigned_abs() as i32) / (1.0 - rho * rho);
    check_stationarity(ErrorProcess::Ar1 { rho }, gamma);
}

#[test]
fn ma1_generator_matches_analytic_autocovariance() {
    let theta = 0.5;
    let gamma = move |h: i64| match h.unsigned_abs() {
        0 => 1.0 + theta * theta,
        1 => theta,
        _ => 0.0,
    };
    check_stationarity(ErrorProcess::Ma1 { theta }, gamma);
}

#[test]
fn generator_factors_agree_with_closed_forms() {
    assert_eq!(ErrorProcess::Ar1 { rho: 0.4 }.long_run_factor(), 1.0 / 0.36);
    assert_eq!(ErrorProcess::Ma1 { theta: 0.5 }.long_run_factor(), 2.25);
    assert_eq!(ErrorProcess::Iid.long_run_factor(), 1.0);
}

#[test]
fn lrv_error_shrinks_with_sample_size() {
    let target = 1.0 / 0.36;
    let cfg = LrvConfig { bandwidth: Tuning::Auto, kernel: Kernel::Bartlett };
    let seeds = 12;
    let mean_error = |n: usize| {
        (0..seeds)
            .map(|s| {
                let x = ar_noise(0.4, n, 20, 500 + s);
                let est = estimate_lrv(&x, &single_means(&x), &cfg).unwrap();
                est.sigma2.values().iter().fold(0.0_f64, |m, v| m.max((v - target).abs() / target))
            })
            .sum::<f64>()
            / seeds as f64
    };
    let errors: Vec<f64> = [500, 2000, 10_000].into_iter().map(mean_error).collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn detection_is_reliable_for_large_jumps() {
    // Jump of 5 against unit noise sd at n = 400.
    let mut hits = 0;
    let reps = 60;
    for r in 0..reps {
        let spec = ScenarioSpec {
            n: 400,
            grid_size: 25,
            means: vec![CurveSpec::Constant { value: 1.0 }, CurveSpec::Constant { value: 6.0 }],
            change_locations: vec![0.3],
            error: ErrorProcess::Ar1 { rho: 0.3 },
            innovation_variance: CurveSpec::Constant { value: 1.0 },
            seed: 9000 + r,
        };
        let (x, truth) = generate(&spec).unwrap();
        let cps = detect_change_points(&x, &SegmentationConfig::default()).unwrap();
        if cps.indices == truth.partition.cuts() {
            hits += 1;
        } else if cps.len() == 1 {
            assert!((cps.locations[0] - 0.3).abs() < 0.02);
            hits += 1;
        }
    }
    assert!(hits as f64 >= 0.95 * reps as f64, "{hits}/{reps}");
}

#[test]
fn iid_coverage_is_near_nominal() {
    let spec = ScenarioSpec {
        n: 400,
        grid_size: 50,
        means: vec![CurveSpec::Constant { value: 0.0 }, CurveSpec::Linear { intercept: 0.0, slope: 5.0 }],
        change_locations: vec![0.5],
        error: ErrorProcess::Iid,
        innovation_variance: CurveSpec::Constant { value: 1.0 },
        seed: 400,
    };
    let cfg = PipelineConfig {
        relevance: RelevantChangeConfig { delta: Tuning::Fixed(0.5), ..Default::default() },
        ..Default::default()
    };
    let report = run_coverage_study(&spec, &cfg, 500).unwrap();
    assert_eq!(report.failures, 0);
    assert!((0.85..=0.95).contains(&report.coverage), "coverage {}", report.coverage);
    assert!(report.change_count_rate >= 0.95);
    assert_eq!(report.relevant_set_rate, 1.0);
}

#[test]
fn study_is_independent_of_worker_count() {
    let spec = ScenarioSpec {
        n: 120,
        grid_size: 10,
        means: vec![CurveSpec::Constant { value: 0.0 }, CurveSpec::Constant { value: 4.0 }],
        change_locations: vec![0.5],
        error: ErrorProcess::Ma1 { theta: 0.5 },
        innovation_variance: CurveSpec::Linear { intercept: 0.5, slope: 1.0 },
        seed: 3,
    };
    let cfg = PipelineConfig {
        relevance: RelevantChangeConfig { delta: Tuning::Fixed(1.0), ..Default::default() },
        bootstrap: BootstrapConfig { replications: 300, ..Default::default() },
        ..Default::default()
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_coverage_study(&spec, &cfg, 16).unwrap())
    };
    let (one, four) = (run(1), run(4));
    assert_eq!(one.outcomes, four.outcomes);
    assert_eq!(one.coverage.to_bits(), four.coverage.to_bits());

    let (x, truth) = generate(&spec).unwrap();
    let means = SegmentMeans::estimate(&x, truth.partition.clone()).unwrap();
    let y = center_residuals(&x, &means).unwrap();
    let lrv = estimate_lrv(&x, &means, &LrvConfig::default()).unwrap();
    let boot = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_bootstrap(&y, &truth.partition.segments(), &lrv, &cfg.bootstrap).unwrap())
    };
    assert_eq!(boot(1).statistics, boot(3).statistics);
}

#[test]
fn scaling_carries_delta_and_jumps() {
    let spec = ScenarioSpec {
        n: 200,
        grid_size: 16,
        means: vec![
            CurveSpec::Sine { amplitude: 1.0, frequency: 1.0, phase: 0.0, offset: 0.0 },
            CurveSpec::Hat { peak: 4.0, center: 0.5, half_width: 0.25 },
        ],
        change_locations: vec![0.6],
        error: ErrorProcess::Iid,
        innovation_variance: CurveSpec::Constant { value: 0.2 },
        seed: 8,
    };
    let (x, _) = generate(&spec).unwrap();
    let lambda = 2.5;
    let y = x.map_rows(|_, r| r.iter_mut().for_each(|v| *v *= lambda)).unwrap();
    let cfg = RelevantChangeConfig::default();
    let (dx, dy) = (auto_delta(&x, &cfg).unwrap(), auto_delta(&y, &cfg).unwrap());
    assert!((dy - lambda * dx).abs() <= 1e-12 * dy);

    let cps = detect_change_points(&x, &SegmentationConfig::default()).unwrap();
    assert_eq!(detect_change_points(&y, &SegmentationConfig::default()).unwrap().indices, cps.indices);
    let rx = relevant_set(&x, &cps, &RelevantChangeConfig { delta: Tuning::Fixed(1.0), ..cfg }).unwrap();
    let ry = relevant_set(&y, &cps, &RelevantChangeConfig { delta: Tuning::Fixed(lambda), ..cfg }).unwrap();
    assert_eq!(rx.indices, ry.indices);
    for (a, b) in rx.all_jumps.iter().zip(&ry.all_jumps) {
        assert!((b - lambda * a).abs() <= 1e-12 * b.abs().max(1.0));
    }
}
