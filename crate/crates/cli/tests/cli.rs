use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fts_bands::pipeline::analyze;
use fts_bands_cli::ingest::{ingest, Layout};
use fts_bands_cli::output::read_bands;
use fts_bands_cli::RunConfig;

const SCENARIO: &str = r#"
n = 240
grid_size = 30
change_locations = [0.5]
seed = 17
means = [
    { kind = "constant", value = 0.0 },
    { kind = "linear", intercept = 0.0, slope = 5.0 },
]
innovation_variance = { kind = "constant", value = 1.0 }
error = { kind = "ar1", rho = 0.3 }
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ftsbands"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Simulates the one-jump fixture into `dir` and returns the data file.
fn fixture(dir: &Path) -> PathBuf {
    let scenario = dir.join("scenario.toml");
    fs::write(&scenario, SCENARIO).unwrap();
    let sim = dir.join("sim");
    ok(&["simulate", "--scenario", s(&scenario), "--output", s(&sim)]);
    sim.join("data.csv")
}

fn analyze_args<'a>(data: &'a Path, out: &'a Path, delta: &'a str) -> Vec<&'a str> {
    vec![
        "analyze", "--input", s(data), "--output", s(out), "-t", "30", "--delta", delta, "--replications", "500",
        "--seed", "5",
    ]
}

fn band_segments(path: &Path) -> Vec<usize> {
    let mut segs: Vec<usize> = read_bands(path).unwrap().iter().map(|r| r.segment).collect();
    segs.dedup();
    segs
}

#[test]
fn one_jump_gives_two_band_groups() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let out = dir.path().join("out");
    let stdout = ok(&analyze_args(&data, &out, "1.0")).stdout;
    assert!(String::from_utf8_lossy(&stdout).contains("relevant segments: [0, 1]"));
    assert_eq!(band_segments(&out.join("bands.csv")), vec![0, 1]);
    assert_eq!(read_bands(&out.join("bands.csv")).unwrap().len(), 60);

    let cps = fs::read_to_string(out.join("changepoints.csv")).unwrap();
    let lines: Vec<&str> = cps.lines().collect();
    assert_eq!(lines[0], "change,cycle,location,jump,relevant");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1,120,0.5,") && lines[1].ends_with(",true"), "{}", lines[1]);
}

#[test]
fn large_delta_leaves_band_zero() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let out = dir.path().join("out");
    ok(&analyze_args(&data, &out, "50"));
    assert_eq!(band_segments(&out.join("bands.csv")), vec![0]);
    let cps = fs::read_to_string(out.join("changepoints.csv")).unwrap();
    assert!(cps.lines().nth(1).unwrap().ends_with(",false"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&analyze_args(&data, &a, "auto"));
    ok(&analyze_args(&data, &b, "auto"));
    for f in ["bands.csv", "changepoints.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    // Diagnostics differ only in the echoed output path.
    let da = fs::read_to_string(a.join("diagnostics.toml")).unwrap();
    let db = fs::read_to_string(b.join("diagnostics.toml")).unwrap();
    assert_eq!(da.replace(s(&a), "OUT"), db.replace(s(&b), "OUT"));
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let first = dir.path().join("first");
    ok(&analyze_args(&data, &first, "auto"));
    let diag: toml::Table = fs::read_to_string(first.join("diagnostics.toml")).unwrap().parse().unwrap();
    let echo = diag["config"].as_table().unwrap().clone();
    let cfg_path = dir.path().join("echo.toml");
    fs::write(&cfg_path, toml::to_string(&echo).unwrap()).unwrap();
    let second = dir.path().join("second");
    ok(&["analyze", "--config", s(&cfg_path), "--output", s(&second)]);
    assert_eq!(fs::read(first.join("bands.csv")).unwrap(), fs::read(second.join("bands.csv")).unwrap());
}

#[test]
fn band_table_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let out = dir.path().join("out");
    ok(&analyze_args(&data, &out, "1.0"));

    let mut cfg = RunConfig { grid_size: 30, ..Default::default() };
    cfg.delta = fts_bands::Tuning::Fixed(1.0);
    cfg.bootstrap.replications = 500;
    cfg.bootstrap.seed = 5;
    let x = ingest(&data, 30, Layout::Auto).unwrap().series;
    let a = analyze(&x, &cfg.pipeline()).unwrap();

    let rows = read_bands(&out.join("bands.csv")).unwrap();
    let mut k = 0;
    let close = |file: f64, mem: f64| (file - mem).abs() <= 5e-12 * mem.abs().max(1e-300);
    for band in &a.bands.bands {
        for (g, &t) in band.center.grid().points().iter().enumerate() {
            let r = rows[k];
            assert_eq!(r.segment, band.index);
            assert!(close(r.t, t));
            assert!(close(r.lower, band.lower.values()[g]), "{} vs {}", r.lower, band.lower.values()[g]);
            assert!(close(r.center, band.center.values()[g]));
            assert!(close(r.upper, band.upper.values()[g]));
            k += 1;
        }
    }
    assert_eq!(k, rows.len());

    let diag: toml::Table = fs::read_to_string(out.join("diagnostics.toml")).unwrap().parse().unwrap();
    let q = diag["bootstrap"]["quantile"].as_float().unwrap();
    assert!(close(q, a.bands.quantile));
    assert_eq!(diag["relevance"]["delta"].as_float(), Some(1.0));
    assert_eq!(diag["bootstrap"]["rng"].as_str(), Some(fts_bands::rng::ALGORITHM));
    assert_eq!(diag["version"].as_str(), Some(fts_bands::VERSION));
    for key in ["sigma2_min", "sigma2_median", "sigma2_mean", "sigma2_max"] {
        assert!(diag["lrv"][key].as_float().unwrap() > 0.0);
    }
}

#[test]
fn simulated_data_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let spec: fts_bands::simulate::ScenarioSpec = toml::from_str(SCENARIO).unwrap();
    let (x, _) = fts_bands::simulate::generate(&spec).unwrap();
    let read = ingest(&data, 30, Layout::Matrix).unwrap().series;
    assert_eq!(read.as_slice(), x.as_slice());
    let truth = fs::read_to_string(dir.path().join("sim/truth.toml")).unwrap();
    assert!(truth.contains("change_cycles = [120]"), "{truth}");
}

#[test]
fn too_few_cycles_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("short.csv");
    fs::write(&data, "1,2,3\n4,5,6\n7,8,9\n").unwrap();
    let out = run(&["analyze", "-i", s(&data), "-o", s(&dir.path().join("o")), "-t", "3", "--delta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn bad_input_exit_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    fs::write(&data, "1,2,3\n4,five,6\n").unwrap();
    let out = run(&["analyze", "-i", s(&data), "-o", s(&dir.path().join("o")), "-t", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 2, column 2"), "{err}");

    let missing = run(&["analyze", "-i", s(&dir.path().join("nope.csv")), "-o", s(&dir.path().join("o"))]);
    assert_eq!(missing.status.code(), Some(2));

    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "alpha = 2.0\n").unwrap();
    let invalid = run(&["analyze", "-c", s(&cfg), "-i", s(&data), "-o", s(&dir.path().join("o"))]);
    assert_eq!(invalid.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&invalid.stderr).contains("alpha"));

    let no_input = run(&["analyze", "-o", s(&dir.path().join("o"))]);
    assert_eq!(no_input.status.code(), Some(2));
}

#[test]
fn coverage_verb_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.toml");
    fs::write(&scenario, SCENARIO).unwrap();
    let out = dir.path().join("cov");
    let stdout = ok(&[
        "coverage", "-s", s(&scenario), "-m", "4", "--replications", "200", "--delta", "1", "-o", s(&out),
    ])
    .stdout;
    assert!(String::from_utf8_lossy(&stdout).contains("coverage:"));
    let table = fs::read_to_string(out.join("coverage.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
    let summary: toml::Table = fs::read_to_string(out.join("coverage.toml")).unwrap().parse().unwrap();
    assert_eq!(summary["replications"].as_integer(), Some(4));
}

#[test]
fn version_verb() {
    let out = ok(&["version"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains(fts_bands::VERSION) && text.contains(fts_bands::rng::ALGORITHM));
}

#[test]
fn ingest_examples() {
    let dir = tempfile::tempdir().unwrap();

    let matrix = dir.path().join("matrix.csv");
    let rows: Vec<Vec<f64>> = (0..5).map(|i| (0..100).map(|k| (i * 100 + k) as f64 / 7.0).collect()).collect();
    let text: String = rows
        .iter()
        .map(|r| r.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    fs::write(&matrix, text).unwrap();
    let got = ingest(&matrix, 100, Layout::Auto).unwrap();
    assert_eq!(got.series.len(), 5);
    for (a, b) in got.series.rows().zip(&rows) {
        assert_eq!(a, b.as_slice());
    }

    let two = dir.path().join("two.csv");
    fs::write(&two, "cycle_id,phase,value\nc,0,0\nc,1,10\n").unwrap();
    assert_eq!(ingest(&two, 3, Layout::Auto).unwrap().series.row(0), [0.0, 5.0, 10.0]);

    let long = dir.path().join("long.csv");
    let f = |p: f64| 20.0 * (std::f64::consts::PI * p).sin() + 3.0 * p;
    let mut text = String::from("cycle_id,phase,value\n");
    for k in 0..50 {
        let p = k as f64 / 49.0;
        text.push_str(&format!("stride1,{p:?},{:?}\n", f(p)));
    }
    fs::write(&long, text).unwrap();
    let got = ingest(&long, 99, Layout::Long).unwrap();
    let row = got.series.row(0);
    for k in 0..50 {
        assert_eq!(row[2 * k], f(k as f64 / 49.0), "knot {k}");
    }
    assert!((row[49] - f(0.5)).abs() < 0.05);
}
