use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use reconfig_harness::output::{parse_csv, CSV_HEADER};

fn reconfig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reconfig")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("reconfig-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn help_succeeds_and_bad_usage_is_exit_1() {
    assert_eq!(code(&reconfig(&["--help"])), 0);
    assert_eq!(code(&reconfig(&["sweep", "--no-such-flag"])), 1);
    assert_eq!(code(&reconfig(&[])), 1);
    assert_eq!(code(&reconfig(&["track", "--policy", "nonsense"])), 1);
}

#[test]
fn config_errors_are_exit_1() {
    let dir = scratch("config");
    let missing = dir.join("does-not-exist.conf");
    assert_eq!(code(&reconfig(&["sweep", "--config", missing.to_str().unwrap()])), 1);

    let bad = dir.join("bad.conf");
    std::fs::write(&bad, "seed = 1\nunknown_key = 3\n").unwrap();
    let out = reconfig(&["sweep", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown_key"));

    let grid = dir.join("grid.conf");
    std::fs::write(&grid, "p_grid = 2, 1\n").unwrap();
    assert_eq!(code(&reconfig(&["sweep", "--config", grid.to_str().unwrap()])), 1);
}

#[test]
fn empty_policy_list_fails_before_writing() {
    let dir = scratch("empty");
    let csv = dir.join("out.csv");
    let svg = dir.join("out.svg");
    let out = reconfig(&[
        "sweep",
        "--policies",
        "",
        "--out-csv",
        csv.to_str().unwrap(),
        "--out-svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(!csv.exists());
    assert!(!svg.exists());
}

fn sweep_to(dir: &Path, extra: &[&str]) -> (Output, PathBuf, PathBuf) {
    let csv = dir.join("out.csv");
    let svg = dir.join("out.svg");
    let mut args = vec!["sweep", "--out-csv", csv.to_str().unwrap(), "--out-svg", svg.to_str().unwrap()];
    args.extend_from_slice(extra);
    (reconfig(&args), csv, svg)
}

#[test]
fn zero_budget_sweep_writes_files() {
    let dir = scratch("zero");
    let (out, csv, svg) = sweep_to(&dir, &["--p-grid", "0", "--policies", "vec-minsum,scalar-minsum"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with(CSV_HEADER));
    let rows = parse_csv(&text).unwrap();
    assert_eq!(rows.len(), 2);
    // with no power both modes track the same unobserved system
    assert_eq!(rows[0].sum_mse, rows[1].sum_mse);
    assert!(rows.iter().all(|r| r.converged && r.lower_sum == r.sum_mse));
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
}

#[test]
fn sweep_without_output_path_prints_csv() {
    let out = reconfig(&["sweep", "--p-grid", "1", "--policies", "scalar-minsum"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(parse_csv(&text).unwrap().len(), 1);
}

#[test]
fn oracle_passes_with_defaults() {
    let out = reconfig(&["oracle"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 5);
}

#[test]
fn track_reports_a_summary() {
    let out = reconfig(&["track", "--policy", "scalar-minmax", "--p", "2", "--simulate", "200"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for field in ["sum MSE", "t*", "rank one", "a[0]", "empirical MSE"] {
        assert!(text.contains(field), "missing {field} in\n{text}");
    }
}

#[test]
fn dump_sdp_writes_each_kind() {
    let dir = scratch("dump");
    for kind in ["minsum", "minmax", "feasibility"] {
        let path = dir.join(format!("{kind}.txt"));
        let out = reconfig(&["dump-sdp", "--kind", kind, "--out", path.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(!text.trim().is_empty());
    }
    let out = reconfig(&["dump-sdp", "--kind", "minsum"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("c_tilde"));
}
