//! End-to-end runs of the command-line binary.

use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rqe-calib"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn digest(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
        .iter()
        .map(|f| {
            let bytes = std::fs::read(f).unwrap();
            (f.file_name().unwrap().to_string_lossy().into_owned(), hex::encode(Sha256::digest(&bytes)))
        })
        .collect()
}

fn simulate(dir: &Path, extra: &[&str]) {
    let mut args = vec!["simulate", "--env", "simple_room", "--seed", "7", "--duration", "1", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    ok(&args);
}

#[test]
fn simulate_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    simulate(&a, &[]);
    simulate(&b, &[]);
    let (da, db) = (digest(&a), digest(&b));
    assert_eq!(da.len(), 4);
    assert_eq!(da, db);
    let c = tmp.path().join("c");
    simulate(&c, &["--td", "20"]);
    assert_ne!(digest(&c), da);
}

#[test]
fn evaluate_identical_files_gives_zero_row() {
    let tmp = tempfile::tempdir().unwrap();
    simulate(tmp.path(), &["--noiseless"]);
    let truth = tmp.path().join("truth.txt");
    let out = ok(&["evaluate", "--result", truth.to_str().unwrap(), "--truth", truth.to_str().unwrap()]);
    let row = out.lines().nth(1).unwrap();
    for field in row.split_whitespace() {
        assert_eq!(field.parse::<f64>().unwrap(), 0.0, "{row}");
    }
}

#[test]
fn failures_exit_non_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nothing");
    for args in [
        vec!["simulate", "--env", "simple_room", "--bogus"],
        vec!["simulate", "--env", "moon", "--out", missing.to_str().unwrap()],
        vec!["evaluate", "--result", missing.to_str().unwrap(), "--truth", missing.to_str().unwrap()],
        vec!["cost-slice", "--data", missing.to_str().unwrap(), "--param", "x", "--range", "-1", "1"],
        vec!["cost-slice", "--data", missing.to_str().unwrap(), "--param", "q", "--range", "-1", "1"],
    ] {
        let out = run(&args);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty());
    }
    simulate(tmp.path(), &["--noiseless"]);
    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(&cfg, "cloud.range_min = 5\ncloud.range_max = 1\n").unwrap();
    let out = run(&["calibrate", "--data", tmp.path().to_str().unwrap(), "--config", cfg.to_str().unwrap(), "--out", "r.txt"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("range"));
}

#[test]
fn scale_slice_is_minimal_at_truth() {
    let tmp = tempfile::tempdir().unwrap();
    simulate(tmp.path(), &["--noiseless"]);
    let cfg = tmp.path().join("c.cfg");
    std::fs::write(&cfg, "cloud.subsample_stride = 8\ncloud.sigma_kernel = 0.02\n").unwrap();
    let csv = ok(&[
        "cost-slice", "--data", tmp.path().to_str().unwrap(), "--param", "s", "--range", "-0.2", "0.2", "--steps", "5",
        "--config", cfg.to_str().unwrap(),
    ]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("offset,value,cost"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    let best = rows.iter().min_by(|a, b| a[2].total_cmp(&b[2])).unwrap();
    assert_eq!(best[0], 0.0);
    assert_eq!(best[1], 1.0);
}

#[test]
fn calibrate_then_export_and_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    simulate(&data, &["--noiseless"]);
    let cfg = tmp.path().join("c.cfg");
    std::fs::write(
        &cfg,
        "cloud.subsample_stride = 16\noptimizer.crs_max_evals = 100\noptimizer.nm_max_evals = 40\nsearch.seed_x = 0.1\nsearch.seed_theta_deg = 60\n",
    )
    .unwrap();
    let result = tmp.path().join("result.txt");
    let out = ok(&["calibrate", "--data", data.to_str().unwrap(), "--config", cfg.to_str().unwrap(), "--out", result.to_str().unwrap()]);
    assert!(out.contains("crs_evals = 100"));
    assert!(tmp.path().join("result.txt.json").exists());
    let text = std::fs::read_to_string(&result).unwrap();
    assert!(text.contains("config.cloud.subsample_stride = 16"));

    let ply = tmp.path().join("cloud.ply");
    ok(&["export-cloud", "--data", data.to_str().unwrap(), "--params", result.to_str().unwrap(), "--out", ply.to_str().unwrap()]);
    assert!(std::fs::read_to_string(&ply).unwrap().contains("element vertex "));

    let truth = data.join("truth.txt");
    let eval = ok(&["evaluate", "--result", result.to_str().unwrap(), "--truth", truth.to_str().unwrap()]);
    assert!(eval.starts_with("x_mm"));
}
