use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mimo-afdm"))
}

fn golden() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden.toml")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn missing_config_exits_with_2() {
    let out = run(&["ber", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn invalid_config_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[system]\nsubcarriers = 8\nbogus = 1\n").unwrap();
    let out = run(&["ber", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_threads_is_rejected() {
    let out = run(&["ber", "--config", golden().to_str().unwrap(), "--threads", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ber_output_matches_frozen_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = run(&["ber", "--config", golden().to_str().unwrap(), "--threads", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let frozen = std::fs::read(golden().with_extension("csv")).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), frozen);
}

#[test]
fn seed_override_changes_the_run() {
    let cfg = golden();
    let a = run(&["ber", "--config", cfg.to_str().unwrap()]);
    let b = run(&["ber", "--config", cfg.to_str().unwrap(), "--seed", "7"]);
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn dense_channel_dump_has_every_entry() {
    let out = run(&["channel", "--config", golden().to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("row,col,re,im"));
    // N·N_r = 16 rows, N·N_t = 32 columns.
    assert_eq!(lines.count(), 16 * 32);
}

#[test]
fn sparse_dump_is_a_subset() {
    let cfg = golden();
    let dense = stdout(&run(&["channel", "--config", cfg.to_str().unwrap()]));
    let out = run(&["channel", "--config", cfg.to_str().unwrap(), "--kind", "sparse", "--threshold-db", "-3"]);
    assert!(out.status.success());
    let sparse = stdout(&out);
    let kept = sparse.lines().skip(1).count();
    assert!((16..16 * 32).contains(&kept));
    let all: std::collections::HashSet<&str> = dense.lines().collect();
    assert!(sparse.lines().all(|l| all.contains(l)));
}

#[test]
fn snr_index_outside_grid_is_a_config_error() {
    let out = run(&["channel", "--config", golden().to_str().unwrap(), "--snr-index", "9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn complexity_requires_its_section() {
    let out = run(&["complexity", "--config", golden().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
