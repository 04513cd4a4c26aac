use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netshuffle"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn golden(csv_name: &str) -> String {
    let text = std::fs::read_to_string(config("golden.sha256")).unwrap();
    text.lines()
        .find_map(|l| l.split_once("  ").filter(|(_, f)| *f == csv_name).map(|(h, _)| h.to_owned()))
        .unwrap()
}

#[test]
fn simulate_writes_the_golden_csv_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig3.csv");
    let cfg = config("fig3_desk.cfg");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("fig3_desk"));
    assert_eq!(hex(&std::fs::read(out).unwrap()), golden("fig3_desk.csv"));
}

#[test]
fn stdout_carries_only_data() {
    let cfg = config("match_desk.cfg");
    let o = run(&["match", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("experiment,statistic,k,ell,effect,alpha,power,power_se,level,level_se,n_mc,seed\n"));
    assert_eq!(text.lines().count(), 4);
    assert!(!o.stderr.is_empty());
}

#[test]
fn json_output_and_seed_override() {
    let cfg = config("bootstrap_desk.cfg");
    let o = run(&["bootstrap", "--config", cfg.to_str().unwrap(), "--format", "json", "--seed", "99", "-q"]);
    assert!(o.status.success());
    assert!(o.stderr.is_empty());
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r["seed"] == 99 && r["experiment"] == "bootstrap_desk"));
}

#[test]
fn subcommand_must_match_config_kind() {
    let cfg = config("fig3_desk.cfg");
    let o = run(&["two-tier", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("simulate experiment, not two-tier"));
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("fig3_desk.cfg")).unwrap().replace("\"n_mc\"", "\"n_mc_typo\"");
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, text).unwrap();
    let o = run(&["simulate", "--config", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("experiment.n_mc_typo"));
}

#[test]
fn ingest_aligns_layers_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("one.txt"), "# first\nb a\nc a\nd x\n").unwrap();
    std::fs::write(dir.path().join("two.txt"), "a b\nb c\ny b\n").unwrap();
    let out = dir.path().join("aligned");
    let o = bin()
        .current_dir(dir.path())
        .args(["ingest", "one.txt", "second=two.txt", "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "3 common vertices\none: 2 edges\nsecond: 2 edges\n");
    assert_eq!(std::fs::read_to_string(out.join("vertices.txt")).unwrap(), "a\nb\nc\n");
    assert_eq!(std::fs::read_to_string(out.join("one.edges")).unwrap(), "a b\na c\n");
    assert_eq!(std::fs::read_to_string(out.join("second.edges")).unwrap(), "a b\nb c\n");

    let o = bin().current_dir(dir.path()).args(["ingest", "one.txt", "--out", "x"]).output().unwrap();
    assert!(!o.status.success());
}

#[test]
fn fetch_lists_sources_and_checks_files() {
    let o = run(&["fetch"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("BNU1") && text.contains("http://www.cis.jhu.edu/"));

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("data.zip");
    std::fs::write(&file, b"abc").unwrap();
    let abc = "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad";
    let f = file.to_str().unwrap();
    let o = run(&["fetch", "--verify", f, "--expect", abc]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().starts_with(abc));
    let o = run(&["fetch", "--verify", f, "--expect", &"0".repeat(64)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("checksum mismatch"));
}
