use std::path::PathBuf;
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "scenarios"].iter().collect()
}

fn tdlek(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdlek")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_prints_truth_value() {
    let model = scenarios().join("umbrella.tlek");
    let o = tdlek(&["check", "-m", model.to_str().unwrap(), "-w", "w0", "B(rain(2,2))"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "true\n");

    let o = tdlek(&["check", "-m", model.to_str().unwrap(), "-w", "nowhere", "rain(2,2)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reduce_learning() {
    let o = tdlek(&["reduce", "[+p(1,1)] B p(1,1)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "B(p(1,1)) | K(p(1,1) <-> p(1,1))\n");
}

#[test]
fn revision_needs_horizon() {
    let f = "[rev(p(1,2),q(1,3))] B q(3,3)";
    assert_eq!(tdlek(&["reduce", f]).status.code(), Some(1));
    let o = tdlek(&["reduce", "--horizon", "4", f]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("q(3,3)"));
}

#[test]
fn parse_canonical_and_errors() {
    let o = tdlek(&["parse", "B  p(1 , inf) & ~q(2,3)"]);
    assert_eq!(stdout(&o), "B(p(1,inf)) & ~q(2,3)\n");
    let o = tdlek(&["parse", "p(1,"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());
    assert_eq!(tdlek(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn runs_marriage_with_trace() {
    let dir = std::env::temp_dir().join(format!("tdlek-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let trace = dir.join("trace.jsonl");
    let scn = scenarios().join("marriage.scn");
    let o = tdlek(&["run", scn.to_str().unwrap(), "--trace", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(out.lines().last(), Some("marryA(5,5), married(6,8), divorceA(8,8), divorced(9,inf)"));
    let lines: Vec<serde_json::Value> =
        std::fs::read_to_string(&trace).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!lines.is_empty());
    assert!(lines.iter().all(|v| v["schema_version"] == 1));
    assert!(lines.iter().any(|v| v["event"] == "restructured"));
}

#[test]
fn umbrella_scenario() {
    let o = tdlek(&["run", scenarios().join("umbrella.scn").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().last(), Some("rain(2,2), take(2,2,umbrella), go(3,inf,shops)"));
}

#[test]
fn failing_expect_exits_one_with_diff() {
    let o = tdlek(&["run", scenarios().join("wrong_expectation.scn").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("- expected: true"), "{err}");
    assert!(err.contains("+ actual:   false"), "{err}");
}

#[test]
fn missing_scenario_is_input_error() {
    assert_eq!(tdlek(&["run", "/nonexistent/x.scn"]).status.code(), Some(2));
}

#[test]
fn rand_test_reports_and_is_deterministic() {
    let a = tdlek(&["rand-test", "reduction-oracle", "--seed", "7", "--count", "200"]);
    let b = tdlek(&["rand-test", "reduction-oracle", "--seed", "7", "--count", "200"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains(" ok, "));

    let o = tdlek(&["rand-test", "frame", "--count", "200"]);
    assert_eq!(stdout(&o), "200 trials, 0 violations\n");
    let o = tdlek(&["rand-test", "property1", "--count", "50"]);
    assert!(stdout(&o).ends_with("0 counterexamples\n"));
    let o = tdlek(&["rand-test", "axioms-lek", "--count", "50"]);
    assert_eq!(stdout(&o), "50/50 ok\n");
    assert_eq!(tdlek(&["rand-test", "nonsense"]).status.code(), Some(2));
}

#[test]
fn help_documents_exit_codes() {
    let o = tdlek(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Exit codes"));
}
