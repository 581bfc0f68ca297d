use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

const NAMES: [&str; 11] = [
    "zador1d",
    "zador2d_square",
    "pierce_floor",
    "shell_h2",
    "growth_euclidean",
    "growth_h2",
    "growth_sinusoid",
    "bishop_gromov",
    "group_cover_torus",
    "pkbd_grid",
    "minkowski_circle",
];

fn quantctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quantctl")).args(args).output().expect("quantctl runs")
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("experiments").join(format!("{name}.toml"))
}

fn run_into(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    quantctl(&args)
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn list_shows_every_experiment() {
    let out = quantctl(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    for name in NAMES {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name} missing");
    }
}

#[test]
fn describe_prints_checks_and_schema() {
    let out = quantctl(&["describe", "shell_h2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("k^p V_{k^d+1,p}"));
    assert!(text.contains("schema:"));
    assert!(text.contains("experiment = \"shell_h2\""));
    let bad = quantctl(&["describe", "nope"]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("unknown experiment"));
}

#[test]
fn shipped_configs_validate() {
    for name in NAMES {
        let out = quantctl(&["validate", shipped(name).to_str().unwrap()]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn malformed_config_fails_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(shipped("zador1d")).unwrap().replace("p = 2.0", "p = 2.0\nq = 1.0");
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, text).unwrap();
    let out_dir = dir.path().join("out");

    let out = quantctl(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown field `q`") && err.contains("line"), "{err}");

    let out = run_into(&cfg, &out_dir, &["--validate-only"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_into(&cfg, &out_dir, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());

    let no_seed = fs::read_to_string(shipped("pkbd_grid")).unwrap().replace("seed = 10\n", "");
    fs::write(&cfg, no_seed).unwrap();
    let out = quantctl(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn zador1d_reaches_the_interval_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(&shipped("zador1d"), dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("coeff_table.csv")).unwrap();
    let last = *column(&csv, "scaled").last().unwrap();
    assert!((last - 1.0 / 12.0).abs() <= 0.02 / 12.0, "{last}");
}

#[test]
fn growth_h2_tracks_sinh() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(&shipped("growth_h2"), dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("growth_curve.csv")).unwrap();
    let (rs, vs) = (column(&csv, "R"), column(&csv, "value"));
    let n = rs.len() as f64;
    let (mx, my) = (rs.iter().sum::<f64>() / n, vs.iter().map(|v| v.ln()).sum::<f64>() / n);
    let sxy: f64 = rs.iter().zip(&vs).map(|(r, v)| (r - mx) * (v.ln() - my)).sum();
    let sxx: f64 = rs.iter().map(|r| (r - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!((0.8..=1.1).contains(&slope), "{slope}");
}

#[test]
fn same_seed_gives_identical_csvs_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["pierce_floor", "shell_h2", "minkowski_circle"] {
        let cfg = shipped(name);
        let a = dir.path().join(format!("{name}_a"));
        let b = dir.path().join(format!("{name}_b"));
        assert!(run_into(&cfg, &a, &[]).status.success());
        let out = Command::new(env!("CARGO_BIN_EXE_quantctl"))
            .args(["run", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()])
            .env("QUANTCTL_THREADS", "1")
            .output()
            .unwrap();
        assert!(out.status.success());
        let (fa, fb) = (csv_files(&a), csv_files(&b));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{name}");
    }
}

#[test]
fn seed_override_changes_random_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = shipped("pierce_floor");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run_into(&cfg, &a, &["--seed", "100"]).status.success());
    assert!(run_into(&cfg, &b, &["--seed", "101"]).status.success());
    assert_ne!(csv_files(&a), csv_files(&b));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 100);
}

#[test]
fn manifest_hashes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_into(&shipped("minkowski_circle"), dir.path(), &[]).status.success());
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let listed: Vec<&serde_json::Value> = manifest["files"].as_array().unwrap().iter().collect();
    let on_disk = fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(listed.len() + 1, on_disk);
    for f in listed {
        let bytes = fs::read(dir.path().join(f["name"].as_str().unwrap())).unwrap();
        let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(f["sha256"].as_str().unwrap(), hex);
    }
    let text = fs::read_to_string(shipped("minkowski_circle")).unwrap();
    let hex: String = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(manifest["config_sha256"].as_str().unwrap(), hex);
    assert!(manifest["wall_time_secs"].as_f64().unwrap() >= 0.0);
    assert_eq!(manifest["library_version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn ledger_failures_are_reported_not_raised() {
    let dir = tempfile::tempdir().unwrap();
    // κ = 0 is not a Ricci lower bound for the hyperbolic plane.
    let text = fs::read_to_string(shipped("bishop_gromov")).unwrap().replace("kappa = -1.0", "kappa = 0.0");
    let cfg = dir.path().join("flat_bound.toml");
    fs::write(&cfg, text).unwrap();
    let out_dir = dir.path().join("out");
    let out = run_into(&cfg, &out_dir, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["ledger_failures"], manifest["ledger_entries"]);
    assert!(manifest["ledger_failures"].as_u64().unwrap() > 0);
    assert!(fs::read_to_string(out_dir.join("ledger.csv")).unwrap().contains(",false\n"));
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_quantctl"))
        .args(["run", shipped("pkbd_grid").to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()])
        .env("QUANTCTL_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
