use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_halfspin"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn build_small_rank() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["build", "--n", "2"], dir.path()), 0);
    assert_eq!(json(&dir.path().join("generators.json")).as_array().unwrap().len(), 6);
    assert_eq!(json(&dir.path().join("points.json")).as_array().unwrap().len(), 9);
    assert!(dir.path().join("dual.dot").exists());
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["outcome"], "pass");
}

#[test]
fn oversized_build_hits_the_budget() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["build", "--n", "9"], dir.path()), 3);
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["build", "--bogus"], dir.path()), 64);
    assert_eq!(run(&["search", "--pattern", "K4", "--n", "4"], dir.path()), 64);
    assert_eq!(run(&["verify", "--suite", "theorem51", "--n", "4", "--m", "5"], dir.path()), 64);
}

#[test]
fn axioms_pass() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["verify", "--suite", "axioms", "--n", "3", "--instances", "500"], dir.path()), 0);
    let r = json(&dir.path().join("axioms.json"));
    assert_eq!(r["kind"], "axioms");
    assert_eq!(r["report"]["passed"], true);
    assert!(std::fs::read_to_string(dir.path().join("summary.txt")).unwrap().starts_with("outcome: pass"));
}

#[test]
fn sampled_search_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["search", "--pattern", "halfH4", "--n", "5", "--sample", "100", "--seed", "7"];
    assert_eq!(run(&args, a.path()), 0);
    assert_eq!(run(&args, b.path()), 0);
    let ra = std::fs::read(a.path().join("search.json")).unwrap();
    let rb = std::fs::read(b.path().join("search.json")).unwrap();
    assert_eq!(ra, rb);
    let r = json(&a.path().join("search.json"));
    assert_eq!(r["report"]["solutions"], 100);
    assert_eq!(r["report"]["check_failures"], 0);
    let ma = json(&a.path().join("manifest.json"));
    let mb = json(&b.path().join("manifest.json"));
    assert_eq!(ma["config_hash"], mb["config_hash"]);
}

#[test]
fn open_probe_under_a_tiny_budget() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&["verify", "--suite", "open-probe", "--m", "6", "--budget", "1s"], dir.path());
    assert!(code == 0 || code == 2, "exit {code}");
    assert!(dir.path().join("open-probe.json").exists());
}

#[test]
fn exhausted_budget_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["search", "--pattern", "H4", "--n", "4", "--budget", "0s"], dir.path()), 2);
    let r = json(&dir.path().join("search.json"));
    assert_eq!(r["report"]["conclusive"], false);
}
