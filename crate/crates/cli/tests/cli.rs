use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_michelson-vc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_toy() {
    let o = cli(&["run", &corpus("add.tz"), "--parameter", "4", "--storage", "38", "--fuel", "100"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "Pair {} 42");
}

#[test]
fn run_exit_codes() {
    let f = corpus("factorial.tz");
    assert_eq!(cli(&["run", &f, "--parameter", "5", "--storage", "0", "--fuel", "3"]).status.code(), Some(5));
    let o = cli(&["run", &corpus("mutez_add.tz"), "--parameter", "9223372036854775807", "--storage", "1"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("mutez overflow in ADD"));
    assert_eq!(cli(&["run", &f, "--parameter", "\"x\"", "--storage", "0"]).status.code(), Some(8));
}

#[test]
fn typecheck_prints_safety_spec() {
    let o = cli(&["typecheck", &corpus("add.tz")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("requires: typeof(stack[0]) = pair nat nat"));
    assert!(out.contains("ensures: typeof(result[0]) = pair (list operation) nat"));
    let j = cli(&["typecheck", &corpus("add.tz"), "--format", "json", "--stacks"]);
    let doc: serde_json::Value = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(doc["safety"]["input_len"], 1);
    assert!(doc["stacks"].as_array().unwrap().len() > 3);
}

#[test]
fn diagnostics_have_positions() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tz");
    std::fs::write(&bad, "parameter nat;\nstorage nat;\ncode { ADD; NIL operation; PAIR }").unwrap();
    let o = cli(&["typecheck", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with(&format!("{}:3:8: error:", bad.display())), "{}", stderr(&o));
    std::fs::write(&bad, "parameter nat;\nstorage nat;\ncode { ADD ").unwrap();
    assert_eq!(cli(&["parse", bad.to_str().unwrap()]).status.code(), Some(2));
    let spec = dir.path().join("bad.spec");
    std::fs::write(&spec, "ensures: storage_out = = 1\n").unwrap();
    let o = cli(&["vcgen", &corpus("add.tz"), "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&spec, "ensures: nothing = 1\n").unwrap();
    let o = cli(&["vcgen", &corpus("add.tz"), "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains(":1:10: error:"), "{}", stderr(&o));
}

#[test]
fn usage_errors() {
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(8));
    assert_eq!(cli(&["vcgen", &corpus("add.tz"), "--mode", "tree"]).status.code(), Some(8));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_invariant_is_a_semantic_error() {
    let o = cli(&["prove", &corpus("factorial.tz")]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("no invariant"));
    let o = cli(&["vcgen", "--mode", "faithful", &corpus("factorial.tz")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("invariant missing"));
}

#[test]
fn mono_writes_scripts_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("vcs");
    let o = cli(&[
        "vcgen",
        "--mode",
        "mono",
        &corpus("factorial.tz"),
        "--spec",
        &corpus("factorial.spec"),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let index: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("index.json")).unwrap()).unwrap();
    let vcs = index["vcs"].as_array().unwrap();
    assert!(!vcs.is_empty());
    for vc in vcs {
        let script = std::fs::read_to_string(out.join(vc["file"].as_str().unwrap())).unwrap();
        assert!(script.starts_with(&format!("; {}", vc["name"].as_str().unwrap())));
        assert!(script.contains("(check-sat)"));
    }
    assert!(vcs.iter().any(|v| v["path"] == "1.1.1.1.1.0"));
    assert!(!index["applied"].as_array().unwrap().is_empty());
}

#[test]
fn faithful_prelude_and_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["vcgen", "--mode", "faithful", "--prelude", &corpus("add.tz"), "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("add.mlw")).unwrap();
    assert!(text.contains("(* ADD *)"));
    assert!(text.contains("let test (__stack__: stack_t)"));
}

#[test]
fn prove_is_deterministic_without_times() {
    let args = ["prove", &corpus("factorial.tz"), "--spec", &corpus("factorial.spec"), "--no-times", "--jobs", "4"];
    let a = cli(&args);
    let b = cli(&args);
    if stdout(&a).contains("error") {
        return; // no z3 on this host
    }
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let j = cli(&["prove", &corpus("add.tz"), "--format", "json", "--no-times"]);
    let doc: serde_json::Value = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(doc["summary"]["total"], doc["verdicts"].as_array().unwrap().len());
}

#[test]
fn prove_reports_not_proved() {
    let o = cli(&["prove", &corpus("factorial.tz"), "--spec", &corpus("factorial_weak.spec"), "--no-times"]);
    assert_eq!(o.status.code(), Some(7));
    assert!(stdout(&o).contains("not proved: contract:ensures.0"));
}

#[test]
fn solver_selection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("solvers");
    std::fs::write(&cfg, "solver never /nonexistent/prover {file}\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = cli(&["prove", &corpus("add.tz"), "--config", c, "--no-simplify", "--no-times"]);
    assert_eq!(o.status.code(), Some(7));
    assert!(stdout(&o).contains("error"));
    assert_eq!(cli(&["prove", &corpus("add.tz"), "--config", c, "--solver", "z3"]).status.code(), Some(8));
}

#[test]
fn contracts_dump() {
    let o = cli(&["contracts", "ADD", "DIG 2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ADD"));
    assert_eq!(cli(&["contracts", "FROB"]).status.code(), Some(8));
    assert_eq!(cli(&["contracts"]).status.code(), Some(0));
}

#[test]
fn parse_prints_canonical_form() {
    let o = cli(&["parse", &corpus("add.tz")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("UNPAIR"));
}
