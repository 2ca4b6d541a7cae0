mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{scenario_path, workspace_root};

fn pairlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairlab"))
        .args(args)
        .current_dir(workspace_root())
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stage_zero_construct_and_decode() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario_path("stage0");
    let out = pairlab(&["construct", path_str(&sc), "--out", path_str(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("# command = construct"));
    assert_eq!(std::fs::read_to_string(dir.path().join("beta.txt")).unwrap().trim(), "0101");

    let beta = dir.path().join("beta.txt");
    let out = pairlab(&["decode", path_str(&sc), "--beta", path_str(&beta), "--out", path_str(dir.path())]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("final capital 2/1"));
    let capital = std::fs::read_to_string(dir.path().join("capital.csv")).unwrap();
    assert_eq!(capital, "a_len,e\n0,1/1\n1,2/1\n");
}

#[test]
fn malformed_beta_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let beta = dir.path().join("beta.txt");
    std::fs::write(&beta, "111\n").unwrap();
    let sc = scenario_path("stage0");
    let out = pairlab(&["decode", path_str(&sc), "--beta", path_str(&beta), "--out", path_str(dir.path())]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("malformed totality segment at stage 0"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&pairlab(&["validate", "no-such-file.toml"])), 2);
    assert_eq!(code(&pairlab(&["construct"])), 2);
    assert_eq!(code(&pairlab(&["frobnicate"])), 2);
}

#[test]
fn validate_reports_unfair_candidate() {
    let out = pairlab(&["validate", path_str(&scenario_path("unfair"))]);
    assert_eq!(code(&out), 1);
    let text = format!("{}{}", stdout(&out), String::from_utf8_lossy(&out.stderr));
    assert!(text.contains("grows: FAIL"), "{text}");
    assert_eq!(code(&pairlab(&["validate", path_str(&scenario_path("tiny"))])), 0);
}

#[test]
fn construct_names_the_offending_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let out = pairlab(&["construct", path_str(&scenario_path("unfair")), "--out", path_str(dir.path())]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("candidate \"grows\" fails"), "{}", stdout(&out));
}

#[test]
fn search_lists_first_two() {
    let out = pairlab(&["search", "--program", "(fold 1 (mul acc (if (= (bit i) 0) 2 0)))", "--x", "-", "--i", "0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("first 01\nsecond 10"), "{}", stdout(&out));
}

#[test]
fn roundtrip_on_seeded_table() {
    let out = pairlab(&["roundtrip", "--seed", "7", "--depth", "6"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn check_passes_and_catches_injected_fault() {
    let tiny = scenario_path("tiny");
    let out = pairlab(&["check", path_str(&tiny)]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));
    let out = pairlab(&["check", path_str(&tiny), "--inject-fault"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL savings-halving"), "{}", stdout(&out));
}
