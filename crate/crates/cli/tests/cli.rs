//! End-to-end checks of the command-line surface: formats, files, and exit
//! codes.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

const CURVE3: &str = "q=3;a=[0,0,0,1,2]";
const CURVE2: &str = "q=2;a=[0,0,1,1,1]";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ellsym"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("ellsym-test-{}-{name}", std::process::id()));
    p
}

fn sample_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../samples/e3-relation.txt")
}

#[test]
fn curve_info_classifies_fibers() {
    let out = run(&["curve-info", CURVE3]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("x=0: ns []"));
    assert!(text.contains("x=1: s [(1,1), (1,2)]"));
    assert!(text.contains("x=2: os [(2,0)]"));
    assert!(text.contains("x=inf: os [inf]"));
    assert!(text.contains("points: 4"));
}

#[test]
fn singular_curve_is_a_domain_error() {
    let out = run(&["curve-info", "q=3;a=[0,0,0,0,0]"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("singular"));
}

#[test]
fn usage_error_exits_one() {
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));
    let help = run(&["--help"]);
    assert!(help.status.success());
    assert!(stdout(&help).contains("ellsym"));
}

#[test]
fn quotient_tree_dot_is_loadable_shape() {
    let out = run(&["quotient-tree", CURVE3, "--format", "dot"]);
    assert!(out.status.success());
    let dot = stdout(&out);
    assert!(dot.starts_with("graph quotient_tree {"));
    assert!(dot.trim_end().ends_with('}'));
    assert!(dot.contains("\"o\" -- \"v(0)\""));
}

#[test]
fn tree_ball_lists_labels() {
    let out = run(&["tree-ball", CURVE3, "/2/0", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("/2/0 c((2,0),1) [1]"));
    assert!(text.contains("/2/0/1 e((2,0)) [0]"));
}

#[test]
fn classify_and_decompose_report_classes() {
    let out = run(&["classify", CURVE3, "{/1/0,/1/1}"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("reduced: s(1;1,2)"));

    let out = run(&["decompose", CURVE3, "{/1/0,/1/1/1/0}"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("pieces: 2"));
    assert!(text.contains("[s(1;1,2)]"));
    assert!(text.contains("[s(1;2,1)]"));

    let json = run(&["classify", CURVE3, "{/1/0,/1/1}", "--format", "json"]);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(parsed["class"], "s(1;1,2)");
}

#[test]
fn reduce_and_verify_round_trip_through_files() {
    let out = run(&["reduce", CURVE3, sample_path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout(&out);
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed["verified"], true);
    assert_eq!(parsed["combination"].as_array().unwrap().len(), 1);

    // The reduce output is itself a valid certificate file.
    let cert_path = tmp("cert.json");
    fs::write(&cert_path, &json).unwrap();
    let out = run(&[
        "verify",
        CURVE3,
        sample_path().to_str().unwrap(),
        cert_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verified"));

    // Tampering flips the exit code to 2.
    let tampered = json.replace("\"multiplier\": 1", "\"multiplier\": 2");
    assert_ne!(tampered, json);
    fs::write(&cert_path, &tampered).unwrap();
    let out = run(&[
        "verify",
        CURVE3,
        sample_path().to_str().unwrap(),
        cert_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    fs::remove_file(&cert_path).ok();
}

#[test]
fn reduce_rejects_unbalanced_input() {
    let path = tmp("unbalanced.txt");
    fs::write(&path, "1 * {/1/0,/1/1}\n").unwrap();
    let out = run(&["reduce", CURVE3, path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("balanced"));
    fs::remove_file(&path).ok();
}

#[test]
fn presentation_reports_running_examples() {
    let out = run(&["presentation", CURVE2]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("classes: e=1 s=0 o=0 ns=2 total=3"));
    assert!(text.contains("homology: free rank 0 torsion []"));
    assert!(text.contains("-> match"));

    let json = run(&["presentation", CURVE3, "--format", "json"]);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(parsed["class_counts"]["total"], 30);
    assert_eq!(parsed["homology"]["free_rank"], 3);

    let csv_path = tmp("matrix.csv");
    let out = run(&[
        "presentation",
        CURVE2,
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(&csv_path).unwrap();
    assert!(csv.lines().next().unwrap().contains("e(inf)"));
    fs::remove_file(&csv_path).ok();
}

#[test]
fn json_outputs_parse() {
    for args in [
        vec!["curve-info", CURVE3, "--format", "json"],
        vec!["quotient-tree", CURVE3, "--format", "json"],
        vec!["tree-ball", CURVE3, "/1", "2", "--format", "json"],
        vec!["classify", CURVE3, "{/1/0,/1/1}", "--format", "json"],
        vec!["decompose", CURVE3, "{/1/0,/2/0}", "--format", "json"],
        vec!["presentation", CURVE2, "--format", "json"],
    ] {
        let out = run(&args);
        assert!(out.status.success(), "{args:?}");
        let parsed: serde_json::Value =
            serde_json::from_str(&stdout(&out)).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert!(!parsed.is_null());
    }
    // The quotient-tree JSON carries the ray count and o-vertex.
    let out = run(&["quotient-tree", CURVE3, "--format", "json"]);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["rays"], 4);
    assert_eq!(parsed["vertices"][0]["label"], "o");
}

#[test]
fn fuzz_is_deterministic_and_passes() {
    let a = run(&["fuzz", CURVE3, "--n", "5", "--seed", "42"]);
    let b = run(&["fuzz", CURVE3, "--n", "5", "--seed", "42"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("5 cases passed"));
    let c = run(&["fuzz", CURVE3, "--n", "5", "--seed", "43"]);
    assert_ne!(stdout(&a), stdout(&c));
}
