//! The command-line contract, driven in-process.

use discrete_dirac::cli::run;
use discrete_dirac::Error;
use std::path::Path;

fn ddirac(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("ddirac").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn free_spectrum_has_no_bound_states() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, _) = ddirac(&["spectrum", "--window", "150", "--out", out]);
    assert_eq!(code, 0);
    assert!(stdout.contains("# bound states: 0"));
    let rows = csv_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(rows.len(), 2 * 301);
    assert!(rows.iter().all(|r| r[2] == "continuum"));
    let min = rows.iter().map(|r| num(&r[1]).abs()).fold(f64::INFINITY, f64::min);
    assert!(min >= 1.0 - 1e-3, "{min}");
}

#[test]
fn strong_site_binds() {
    let (code, stdout, _) = ddirac(&["spectrum", "--window", "60", "--potential", "single_site(0, -3, 0, 0, 0)"]);
    assert_eq!(code, 0);
    assert!(stdout.lines().any(|l| l.ends_with(",bound")));
}

#[test]
fn malformed_potential_file_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("q.txt");
    std::fs::write(&p, "# n q11 q12 q21 q22\n0 0.1 0.2 0.2 0.0\n1 0.1 oops 0.2 0.0\n").unwrap();
    let (code, _, stderr) = ddirac(&["spectrum", "--window", "20", "--potential", p.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stderr.starts_with("ERROR 1:") && stderr.contains("line 3"), "{stderr}");
}

#[test]
fn free_scattering_is_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = ddirac(&["scattering", "--theta-grid", "-3.14159:3.14159:41", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    for r in csv_rows(&dir.path().join("scattering.csv")) {
        assert!((num(&r[9]) - 1.0).abs() < 1e-12 && num(&r[10]).abs() < 1e-12);
        assert!(num(&r[15]).abs() < 1e-10);
    }
    assert_eq!(stdout.lines().filter(|l| l.starts_with("# edge")).count(), 4);
}

#[test]
fn scattering_unitarity_column_for_random_potential() {
    let (code, stdout, _) = ddirac(&["scattering", "--potential", "seeded_random(4, 3, 0.1)", "--theta-grid", "-3:3:25"]);
    assert_eq!(code, 0);
    for l in stdout.lines().skip(1).filter(|l| !l.starts_with('#')) {
        let u: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        assert!(u.abs() < 1e-10, "{l}");
    }
}

#[test]
fn resonance_counts() {
    let count = |args: &[&str]| -> usize {
        let (code, stdout, _) = ddirac(args);
        assert_eq!(code, 0);
        let line = stdout.lines().find(|l| l.starts_with("# resonant edges:")).unwrap();
        line.rsplit(' ').next().unwrap().parse().unwrap()
    };
    assert_eq!(count(&["resonances"]), 4);
    assert_eq!(count(&["resonances", "--potential", "single_site(0, 0.3, 0.2, 0.2, -0.25)"]), 0);
    assert_eq!(count(&["resonances", "--tune", "-0.5:0.25"]), 1);
    let (code, _, stderr) = ddirac(&["resonances", "--tune", "0:0.25"]);
    assert_eq!(code, 1, "{stderr}");
}

#[test]
fn evolve_at_zero_is_identity_minus_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, _) = ddirac(&["evolve", "--t-grid", "0:4:2:lin", "--method", "both", "--window", "80", "--interior", "4", "--out", out]);
    assert_eq!(code, 0, "{stdout}");
    for r in csv_rows(&dir.path().join("kernel_t0.csv")) {
        let (n, k) = (num(&r[0]), num(&r[1]));
        let id = if n == k { 1.0 } else { 0.0 };
        assert!((num(&r[2]) - id).abs() < 1e-12 && (num(&r[8]) - id).abs() < 1e-12);
        assert!(num(&r[4]).abs() < 1e-12 && num(&r[6]).abs() < 1e-12);
    }
    for r in csv_rows(&dir.path().join("kernel_t4.csv")) {
        assert!(num(r.last().unwrap()) < 1e-9);
    }
}

#[test]
fn decay_writes_series_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = ddirac(&["decay", "--t-grid", "10:80:6:log", "--window", "150", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("slope="));
    let text = std::fs::read_to_string(dir.path().join("decay.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,norm"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 7);
    assert!(text.lines().any(|l| l.starts_with("# slope=") && l.contains("fit_window=3:6")));
}

#[test]
fn free_kernel_identity_and_oracle() {
    let (code, stdout, _) = ddirac(&["free-kernel", "--t", "0", "--n", "0", "--k", "0"]);
    assert_eq!(code, 0);
    let omega: Vec<f64> = stdout.lines().nth(1).unwrap().split(',').skip(1).map(num).collect();
    assert!((omega[0] - 1.0).abs() < 1e-12 && (omega[6] - 1.0).abs() < 1e-12);
    assert!(stdout.contains("quad_error"));
    let (code, stdout, _) = ddirac(&["free-kernel", "--t", "12.5", "--n", "3", "--k", "-4", "--method", "oracle", "--window", "100"]);
    assert_eq!(code, 0);
    let d: f64 = stdout.lines().find(|l| l.contains("max difference")).unwrap().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(d < 1e-10);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# resonance check\nmass = 1.0\npotential = single_site(0, 0.3, 0.2, 0.2, -0.25)\nthreshold = 1e-8\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let (code, stdout, _) = ddirac(&["resonances", "--config", cfg]);
    assert_eq!(code, 0);
    assert!(stdout.contains("# resonant edges: 0"));
    let (code, stdout, _) = ddirac(&["resonances", "--config", cfg, "--potential", "zero"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("# resonant edges: 4"));
    std::fs::write(dir.path().join("bad.cfg"), "mass = 1\nwindoww = 3\n").unwrap();
    let (code, _, stderr) = ddirac(&["spectrum", "--config", dir.path().join("bad.cfg").to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn validation_errors_exit_one() {
    for args in [
        &["spectrum", "--mass", "-1"][..],
        &["spectrum", "--window", "100000"],
        &["decay", "--t-grid", "1:2"],
        &["decay", "--norm", "l7"],
        &["evolve", "--method", "euler"],
        &["spectrum", "--potential", "single_site(0, 0, 0.1, 0.2, 0)"],
        &["bogus"],
    ] {
        let (code, _, stderr) = ddirac(args);
        assert_eq!(code, 1, "{args:?}");
        assert!(stderr.starts_with("ERROR 1: "), "{stderr}");
    }
}

#[test]
fn numerical_failures_map_to_two() {
    assert_eq!(Error::Quadrature { estimate: 1.0, tolerance: 1e-10 }.exit_code(), 2);
    assert_eq!(Error::Consistency("W vanished".into()).exit_code(), 2);
    assert_eq!(Error::LinearAlgebra("no convergence".into()).exit_code(), 2);
}

#[test]
fn commands_are_deterministic() {
    let a = ddirac(&["scattering", "--potential", "seeded_random(1, 2, 0.0)", "--theta-grid", "-2:2:7"]);
    let b = ddirac(&["scattering", "--potential", "seeded_random(1, 2, 0.0)", "--theta-grid", "-2:2:7"]);
    assert_eq!(a, b);
}
