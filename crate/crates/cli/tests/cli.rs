use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcs")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const PROBLEM: &str = "\
# convection-diffusion with a mixed term
c1 = 2.0
c2 = -1.0
d11 = 1.0
d12 = 0.3
d21 = 0.3
d22 = 0.5
m1 = 16
m2 = 12
dt = 0.01
initial = random:7
";

fn csv_values(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn solve_writes_field_and_norm_log() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "prob.cfg", PROBLEM);
    let out = dir.path().join("u.csv");
    let run = mcs(&["solve", "--config", &cfg, "--steps", "100", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));

    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i,j,u"));
    assert_eq!(lines.count(), 16 * 12);

    let log = fs::read_to_string(dir.path().join("u.norms.csv")).unwrap();
    let rows: Vec<&str> = log.lines().collect();
    assert_eq!(rows[0], "step,max_norm,l2_norm");
    assert_eq!(rows.len(), 102);
    assert!(rows[100].starts_with("99,"));
}

#[test]
fn constant_field_is_unchanged() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", &PROBLEM.replace("random:7", "constant:2.5"));
    let out = dir.path().join("u.csv");
    let run = mcs(&["solve", "--config", &cfg, "--steps", "20", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0);
    for v in csv_values(&out) {
        assert!((v - 2.5).abs() <= 1e-14, "{v}");
    }
}

#[test]
fn douglas_override_takes_a_different_path() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "prob.cfg", PROBLEM);
    let mcs_out = dir.path().join("mcs.csv");
    let dg_out = dir.path().join("douglas.csv");
    assert_eq!(
        code(&mcs(&["solve", "--config", &cfg, "--steps", "5", "--out", mcs_out.to_str().unwrap()])),
        0
    );
    let run = mcs(&[
        "solve",
        "--config",
        &cfg,
        "--steps",
        "5",
        "--scheme",
        "douglas",
        "--theta",
        "0.5",
        "--out",
        dg_out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0);
    assert!(stdout(&run).starts_with("douglas 5 steps"));
    let (a, b) = (csv_values(&mcs_out), csv_values(&dg_out));
    let diff = a.iter().zip(&b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(diff > 1e-8);
}

#[test]
fn figure1_default_grid_has_101_rows_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    let run = mcs(&["figure1", "--seed", "42", "--samples", "200000", "--out", a.to_str().unwrap()]);
    assert_eq!(code(&run), 0);
    let text = fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("theta,max_abs_s,witness_z0_re,"));
    assert_eq!(text.lines().count(), 102);
    let meta = fs::read_to_string(dir.path().join("a.meta.txt")).unwrap();
    assert!(meta.contains("seed"));
    assert!(meta.contains("200000"));

    let run = mcs(&[
        "figure1",
        "--seed",
        "42",
        "--samples",
        "200000",
        "--threads",
        "3",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let run = mcs(&[
        "figure1",
        "--seed",
        "42",
        "--samples",
        "200000",
        "--theta-min",
        "0.25",
        "--theta-max",
        "0.5",
        "--theta-step",
        "0.0025",
        "--out",
        c.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn figure1_explicit_thetas() {
    let run = mcs(&["figure1", "--samples", "1000", "--theta", "0.3,0.6"]);
    assert_eq!(code(&run), 0);
    let text = stdout(&run);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("2.9999999999999999e-1,"));
    assert!(rows[2].starts_with("5.9999999999999998e-1,"));
}

#[test]
fn figure1_rejects_zero_samples() {
    assert_eq!(code(&mcs(&["figure1", "--samples", "0"])), 2);
}

#[test]
fn verify_theorem_four() {
    let run = mcs(&["verify", "--theorem", "4"]);
    assert_eq!(code(&run), 0);
    let text = stdout(&run);
    assert!(text.contains("argmax x*"));
    assert!(text.contains("= 1.99999999999999"));
    assert!(text.contains("4.16666666666666"));
    assert!(text.lines().filter(|l| l.starts_with("[PASS]")).count() == 4);
}

#[test]
fn verify_theorem_three_reports_instability() {
    let run = mcs(&["verify", "--theorem", "3", "--theta", "0.3"]);
    assert_eq!(code(&run), 0);
    let text = stdout(&run);
    assert!(text.contains("unstable"));
    assert!(text.contains("= -1.2000"));
}

#[test]
fn verify_all_passes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("checks.csv");
    let run = mcs(&["verify", "--theorem", "all", "--samples", "100000", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0, "{}", stdout(&run));
    assert!(!stdout(&run).contains("[FAIL]"));
    let csv = fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("theorem,check,measured,requirement,passed"));
}

#[test]
fn verify_rejects_unknown_theorem() {
    assert_eq!(code(&mcs(&["verify", "--theorem", "6"])), 2);
}

#[test]
fn amplification_zero_mode_is_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "prob.cfg", PROBLEM);
    let run = mcs(&["amplification", "--config", &cfg, "--k1", "0", "--k2", "0"]);
    assert_eq!(code(&run), 0);
    let text = stdout(&run);
    assert!(text.contains("measured  = (1.0000000000000000e0, 0.0000000000000000e0)"));
    assert!(text.contains("difference = 0.0000000000000000e0"));
}

#[test]
fn amplification_matches_symbol_for_every_scheme() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "prob.cfg", PROBLEM);
    for (k1, k2) in [(3, 5), (15, 1), (8, 6)] {
        for scheme in ["mcs", "douglas"] {
            let out = dir.path().join("amp.csv");
            let run = mcs(&[
                "amplification",
                "--config",
                &cfg,
                "--k1",
                &k1.to_string(),
                "--k2",
                &k2.to_string(),
                "--scheme",
                scheme,
                "--out",
                out.to_str().unwrap(),
            ]);
            assert_eq!(code(&run), 0, "{}", stdout(&run));
            let csv = fs::read_to_string(&out).unwrap();
            let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
            assert!(row[7] <= 1e-12);
        }
    }
}

#[test]
fn amplification_bounded_for_large_steps() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "big.cfg", &PROBLEM.replace("dt = 0.01", "dt = 100"));
    for (k1, k2) in [(1, 1), (8, 6), (5, 11)] {
        let out = dir.path().join("amp.csv");
        let run = mcs(&[
            "amplification",
            "--config",
            &cfg,
            "--k1",
            &k1.to_string(),
            "--k2",
            &k2.to_string(),
            "--theta",
            "0.5",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&run), 0);
        let csv = fs::read_to_string(&out).unwrap();
        let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert!(row[2].hypot(row[3]) <= 1.0 + 1e-12);
    }
}

#[test]
fn amplification_rejects_mode_outside_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "prob.cfg", PROBLEM);
    assert_eq!(code(&mcs(&["amplification", "--config", &cfg, "--k1", "16", "--k2", "0"])), 2);
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&mcs(&["solve", "--bogus"])), 2);
    assert_eq!(code(&mcs(&["solve"])), 2);
    assert_eq!(code(&mcs(&["frobnicate"])), 2);
    let bad = write_config(dir.path(), "bad.cfg", "m1 = 8\nm2 = 8\ndt = 0.1\nsigma = 1\n");
    let run = mcs(&["solve", "--config", &bad]);
    assert_eq!(code(&run), 2);
    assert!(String::from_utf8_lossy(&run.stderr).contains("sigma"));
    let indefinite =
        write_config(dir.path(), "nd.cfg", "m1 = 8\nm2 = 8\ndt = 0.1\nd11 = 1\nd22 = 1\nd12 = 3\nd21 = 3\n");
    assert_eq!(code(&mcs(&["solve", "--config", &indefinite])), 2);
}

#[test]
fn overflow_is_a_numerical_breakdown() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "huge.cfg", "d11 = 1e10\nc1 = 1\nm1 = 8\nm2 = 8\ndt = 1e300\n");
    let run = mcs(&["solve", "--config", &cfg]);
    assert_eq!(code(&run), 3);
    assert!(String::from_utf8_lossy(&run.stderr).contains("breakdown"));
}

#[test]
fn help_lists_every_flag() {
    let expect: [(&str, &[&str]); 4] = [
        ("solve", &["--steps", "--scheme", "--theta"]),
        ("figure1", &["--samples", "--theta-min", "--theta-max", "--theta-step", "--theta"]),
        ("verify", &["--theorem", "--theta", "--samples"]),
        ("amplification", &["--k1", "--k2", "--scheme", "--theta"]),
    ];
    for (cmd, flags) in expect {
        let run = mcs(&[cmd, "--help"]);
        assert_eq!(code(&run), 0);
        let text = stdout(&run);
        for flag in flags.iter().chain(&["--out", "--seed", "--threads", "--config"]) {
            assert!(text.contains(flag), "{cmd} --help misses {flag}");
        }
    }
}
