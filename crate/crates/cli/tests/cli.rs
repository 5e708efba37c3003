use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use plap_cli::{parse_scenario, run, RunOptions};

fn plap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plap"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn bundled() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/acceptance")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bundled_suite_passes() {
    let out = tempfile::tempdir().unwrap();
    let o = plap(&["--out", s(out.path()), "suite", s(&bundled())]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(stdout.contains("10 scenarios, 0 failed"), "{stdout}");
    let summary = fs::read_to_string(out.path().join("summary.txt")).unwrap();
    assert_eq!(summary, stdout);
}

#[test]
fn empty_directory_gives_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = plap(&["suite", s(dir.path())]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("0 scenarios, 0 failed"));
}

#[test]
fn one_failing_scenario_fails_the_suite() {
    let dir = tempfile::tempdir().unwrap();
    let heat = fs::read_to_string(bundled().join("heat.scn")).unwrap();
    fs::write(dir.path().join("good.scn"), &heat).unwrap();
    // the discrete reference error is about 1e-14; demand the impossible
    fs::write(dir.path().join("bad.scn"), heat.replace("heat_tol = 1e-8", "heat_tol = 1e-30")).unwrap();
    fs::write(dir.path().join("broken.scn"), "[grid]\ndim = 7\n").unwrap();
    let out = tempfile::tempdir().unwrap();
    let o = plap(&["--out", s(out.path()), "suite", s(dir.path())]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(1), "{stdout}");
    assert!(stdout.lines().any(|l| l.starts_with("bad") && l.contains("FAIL")), "{stdout}");
    assert!(stdout.lines().any(|l| l.starts_with("good") && l.contains("PASS")), "{stdout}");
    assert!(stdout.lines().any(|l| l.starts_with("broken") && l.contains("ERROR") && l.contains("`dim`")));
    assert!(stdout.contains("3 scenarios, 2 failed"));
}

#[test]
fn identical_runs_write_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let scn = bundled().join("contraction-2d.scn");
    for d in [&a, &b] {
        assert!(plap(&["--out", s(d.path()), "--seed", "5", "run", s(&scn)]).status.success());
    }
    for f in ["observables.csv", "plot/energy.csv", "report.txt"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let c = tempfile::tempdir().unwrap();
    let rs = bundled().join("contraction-1d.scn");
    for (d, seed) in [(&a, "1"), (&c, "2")] {
        assert!(plap(&["--out", s(d.path()), "--seed", seed, "run", s(&rs)]).status.success());
    }
    assert_ne!(
        fs::read(a.path().join("observables.csv")).unwrap(),
        fs::read(c.path().join("observables.csv")).unwrap()
    );
}

#[test]
fn zero_datum_gives_zero_series() {
    let out = tempfile::tempdir().unwrap();
    let o = plap(&["--out", s(out.path()), "run", s(&bundled().join("zero.scn"))]);
    assert!(o.status.success());
    let csv = fs::read_to_string(out.path().join("observables.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert!(cols[1..7].iter().all(|c| c.parse::<f64>().unwrap() == 0.0), "{row}");
    }
}

#[test]
fn heat_scenario_matches_spectral_reference() {
    let scn = parse_scenario(&bundled().join("heat.scn")).unwrap();
    let out = tempfile::tempdir().unwrap();
    let res = run(
        &scn,
        &RunOptions {
            out: Some(out.path().to_path_buf()),
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert!(res.pass());
    let heat = res.report.checks.iter().find(|c| c.name == "heat discrete reference").unwrap();
    assert!(heat.worst_excess < 1e-8);
    // the spectral recurrence, independently: (1 + tau lambda_h)^-n at the midpoint
    let (h, tau, n) = (1.0 / 128.0, 1e-3, 100);
    let lambda_h = 4.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
    let expected = (1.0 + tau * lambda_h).powi(-n);
    let profile = fs::read_to_string(out.path().join("plot/profile.csv")).unwrap();
    let mid: Vec<f64> = profile.lines().nth(65).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(mid[0], 0.5);
    assert!((mid[2] - expected).abs() < 1e-10, "{} vs {expected}", mid[2]);
}

#[test]
fn self_test_detects_tampering() {
    let clean = plap(&["self-test"]);
    assert!(clean.status.success(), "{}", String::from_utf8_lossy(&clean.stdout));
    let bad = plap(&["self-test", "--corrupt"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
}

#[test]
fn strict_mode_narrows_slack() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let scn = bundled().join("lr-dissipation.scn");
    assert!(plap(&["--out", s(a.path()), "run", s(&scn)]).status.success());
    plap(&["--out", s(b.path()), "--strict", "run", s(&scn)]);
    let slack = |d: &Path| -> f64 {
        let r = fs::read_to_string(d.join("report.txt")).unwrap();
        let block = r.split("[check L2 contraction]").nth(1).unwrap();
        block.lines().find_map(|l| l.strip_prefix("slack = ")).unwrap().parse().unwrap()
    };
    assert!((slack(a.path()) / slack(b.path()) - 10.0).abs() < 1e-9);
}

#[test]
fn parse_errors_name_line_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.scn");
    fs::write(&f, "[grid]\ndim = 1\nnodes = 17\n\n[flow]\np = 0.5\nhorizon = 1\nsteps = 2\n").unwrap();
    let o = plap(&["run", s(&f)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.scn:6: `p`: p must exceed 1"), "{err}");
}

#[test]
fn estimate_sobolev_verb_recovers_poincare_constant() {
    let out = tempfile::tempdir().unwrap();
    let o = plap(&["--out", s(out.path()), "estimate-sobolev", s(&bundled().join("poincare.scn"))]);
    assert!(o.status.success());
    let text = fs::read_to_string(out.path().join("sobolev.txt")).unwrap();
    let c: f64 = text.lines().find_map(|l| l.strip_prefix("constant = ")).unwrap().parse().unwrap();
    assert!((c * std::f64::consts::PI - 1.0).abs() < 0.01);
    assert!(out.path().join("maximizer.snap").exists());
}
