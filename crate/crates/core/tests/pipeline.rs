use std::fs;
use std::path::Path;
use std::process::Command;

use shrinking_rsa::config::{Mode, RunConfig};
use shrinking_rsa::execute::{execute, read_peaks, sha256_hex};
use shrinking_rsa::Error;

fn small_line(out: &Path, threads: usize) -> RunConfig {
    let mut c = RunConfig::new(Mode::Sim1d, 31);
    c.box_size = Some(500.0);
    c.replicas = Some(70);
    c.snapshots = vec![1.0, 4.0, 8.0];
    c.threads = Some(threads);
    c.out_dir = out.to_path_buf();
    c
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    execute(&small_line(&a, 1)).unwrap();
    execute(&small_line(&b, 1)).unwrap();
    execute(&small_line(&c, 3)).unwrap();
    let first = csv_files(&a);
    assert_eq!(first.len(), 5);
    assert_eq!(first, csv_files(&b));
    assert_eq!(first, csv_files(&c));
}

#[test]
fn manifest_lists_every_file_with_its_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = RunConfig::new(Mode::Sim2d, 4);
    config.box_size = Some(20.0);
    config.replicas = Some(3);
    config.snapshots = vec![2.0, 5.0];
    config.out_dir = tmp.path().to_path_buf();
    let manifest = execute(&config).unwrap();
    let mut on_disk: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    let listed: Vec<String> = manifest.files.iter().map(|f| f.path.clone()).collect();
    assert_eq!(listed, on_disk);
    for f in &manifest.files {
        let bytes = fs::read(tmp.path().join(&f.path)).unwrap();
        assert_eq!(f.sha256, sha256_hex(&bytes));
        assert_eq!(f.bytes, bytes.len() as u64);
    }
    assert_eq!(manifest.config_sha256, sha256_hex(config.to_json().as_bytes()));
    let text = fs::read_to_string(tmp.path().join("manifest.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["seed"], 4);
    assert!(json["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn empty_snapshot_list_gives_no_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = small_line(tmp.path(), 1);
    config.snapshots.clear();
    let manifest = execute(&config).unwrap();
    assert!(manifest.files.iter().all(|f| !f.path.starts_with("gaps_")));
    assert!(read_peaks(tmp.path()).unwrap().points().is_empty());
}

#[test]
fn failed_runs_leave_nothing_behind() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = RunConfig::new(Mode::Analyze, 1);
    config.analysis.input = Some(tmp.path().join("missing.csv"));
    config.out_dir = tmp.path().join("out");
    assert!(matches!(execute(&config), Err(Error::Io { .. })));
    assert_eq!(fs::read_dir(&config.out_dir).unwrap().count(), 0);

    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let mut config = small_line(&blocker, 1);
    config.replicas = Some(2);
    assert!(matches!(execute(&config), Err(Error::Io { .. })));
}

#[test]
fn analyze_fits_solver_peaks() {
    let tmp = tempfile::tempdir().unwrap();
    let mut exact = RunConfig::new(Mode::Exact, 1);
    exact.schedule.kind = shrinking_rsa::ScheduleKind::Constant;
    exact.snapshots = vec![10.0, 100.0, 1000.0, 10_000.0];
    exact.out_dir = tmp.path().join("exact");
    execute(&exact).unwrap();
    let mut analyze = RunConfig::new(Mode::Analyze, 1);
    analyze.analysis.input = Some(exact.out_dir.clone());
    analyze.analysis.t_min = 100.0;
    analyze.out_dir = tmp.path().join("fit");
    execute(&analyze).unwrap();
    let fit: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("fit/fit.json")).unwrap()).unwrap();
    assert_eq!(fit["source"], "exact");
    assert_eq!(fit["n_points"], 3);
    let slope = fit["slope"].as_f64().unwrap();
    assert!((slope - 0.6305).abs() < 0.01, "slope {slope}");
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shrinkrsa"))
}

#[test]
fn command_line_runs_configs_and_honours_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.json");
    fs::write(&config, r#"{"mode": "sim1d", "box_size": 300, "replicas": 5, "snapshots": [2]}"#).unwrap();

    let missing_seed = cli().arg("sim1d").arg("--config").arg(&config).output().unwrap();
    assert!(!missing_seed.status.success());
    assert!(String::from_utf8_lossy(&missing_seed.stderr).contains("seed"));

    let from_env = tmp.path().join("env");
    let status = cli()
        .args(["sim1d", "--seed", "3", "--threads", "2", "--config"])
        .arg(&config)
        .env("SHRINKRSA_OUT", &from_env)
        .status()
        .unwrap();
    assert!(status.success());
    let flag = tmp.path().join("flag");
    let status = cli()
        .args(["sim1d", "--seed", "3", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&flag)
        .env("SHRINKRSA_OUT", tmp.path().join("unused"))
        .status()
        .unwrap();
    assert!(status.success());
    assert!(!tmp.path().join("unused").exists());
    assert_eq!(csv_files(&from_env), csv_files(&flag));

    let wrong_mode = cli().args(["sim2d", "--seed", "1", "--config"]).arg(&config).output().unwrap();
    assert!(!wrong_mode.status.success());
    let bad_figure = cli().args(["figure", "fig1", "--seed", "1"]).output().unwrap();
    assert!(!bad_figure.status.success());
}
