//! End-to-end checks of the `sda` binary: exit codes, report structure,
//! determinism, verification round-trips, and tamper detection.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sda"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 output")
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).expect("report parses as JSON")
}

fn write_report(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn approx_emits_passing_certificates() {
    let out = sda(&["approx", "610/987", "--eps", "1/10"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let doc = json(&out);
    assert_eq!(doc["schema_version"], "1");
    assert_eq!(doc["command"], "approx");
    assert_eq!(doc["config"]["beta"], "2");
    assert_eq!(doc["results"].as_array().unwrap().len(), 1);
    let certs = doc["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 2);
    assert!(certs.iter().all(|c| c["pass"] == true));
}

#[test]
fn reports_are_byte_deterministic() {
    let args = ["illl", "610/987", "--qmax", "1024"];
    let first = sda(&args);
    let second = sda(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn decimal_and_fraction_flags_canonicalize_identically() {
    let a = sda(&["approx", "0.5", "--eps", "0.25"]);
    let b = sda(&["approx", "1/2", "--eps", "1/4"]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn matrix_file_and_inline_rows_parse_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("target.mat");
    fs::write(&path, "# a 2x2 target\n1/2 1/3\n1/5 1/7\n").unwrap();
    let from_file = sda(&["approx", path.to_str().unwrap(), "--eps", "1/10"]);
    let inline = sda(&["approx", "1/2 1/3; 1/5 1/7", "--eps", "1/10"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(stdout(&from_file), stdout(&inline));
}

#[test]
fn inline_matrix_may_start_with_a_negative_entry() {
    let out = sda(&["approx", "-1/2 1/3; 1/5 -1/7", "--eps", "1/10"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let doc = json(&out);
    assert_eq!(doc["config"]["matrix"][0][0], "-1/2");
    assert_eq!(doc["config"]["matrix"][1][1], "-1/7");
}

#[test]
fn domain_violations_exit_3() {
    for args in [
        vec!["approx", "610/987", "--eps", "1"],
        vec!["approx", "610/987", "--eps", "0"],
        vec!["approx", "610/987", "--alpha", "1/4"],
        vec!["illl", "610/987", "--d", "1"],
        vec!["illl", "610/987", "--qmax", "1"],
        vec!["approx", "610/987", "--precision", "0"],
    ] {
        let out = sda(&args);
        assert_eq!(code(&out), 3, "args {args:?}: {}", stderr(&out));
    }
}

#[test]
fn parse_failures_exit_2() {
    for args in [
        vec!["approx", "not@matrix"],
        vec!["approx", "1/0"],
        vec!["approx", "1/2 1/3; 1/5"],
        vec!["approx", "610/987", "--eps", "abc"],
        vec!["verify", "/nonexistent/report.json"],
    ] {
        let out = sda(&args);
        assert_eq!(code(&out), 2, "args {args:?}: {}", stderr(&out));
    }
}

#[test]
fn inadmissible_query_caps_exit_3() {
    // Defaults give the admissible interval [2^(3/4) * 2, 1024]; both sides out.
    for q in ["2", "2000"] {
        let out = sda(&["query", "610/987", "--Q", q]);
        assert_eq!(code(&out), 3, "Q={q}: {}", stderr(&out));
        assert!(stderr(&out).contains("admissible"));
    }
}

#[test]
fn query_selects_first_round_for_small_cap() {
    let out = sda(&["query", "610/987", "--Q", "3"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let doc = json(&out);
    assert_eq!(doc["query"]["selected_k"], 1);
    assert_eq!(doc["query"]["improvement_ratio"], "2^(1/1)");
    assert_eq!(doc["query"]["prior_bound_coeff"], "2^(5/2)");
    assert_eq!(doc["query"]["current_bound_coeff"], "2^(3/2)");
    let names: Vec<&str> = doc["certificates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    for expected in [
        "k_prime",
        "Q_admissible",
        "k_selection",
        "q_within_Q",
        "query_error_bound",
        "improvement_factor",
    ] {
        assert!(names.contains(&expected), "missing {expected}");
    }
}

#[test]
fn illl_defaults_reach_predicted_round() {
    let out = sda(&["illl", "610/987", "--qmax", "1024"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["illl"]["k_prime_predicted"], 10);
    assert_eq!(doc["illl"]["k_observed"], 10);
    assert_eq!(doc["illl"]["stop_reason"], "k_prime_reached");
    assert_eq!(doc["results"].as_array().unwrap().len(), 10);
}

#[test]
fn oracle_reports_exhaustive_best() {
    let out = sda(&["oracle", "610/987", "--Q", "13"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["oracle"]["q_star"], serde_json::json!(["13"]));
    assert_eq!(doc["oracle"]["best_error"], "34/987");
    assert_eq!(doc["oracle"]["dirichlet"]["max_error"], "34/987");
}

#[test]
fn oracle_guard_exits_3() {
    let out = sda(&["oracle", "1/3 1/5 1/7", "--Q", "2000"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("intractable") || stderr(&out).contains("bound"));
}

#[test]
fn oracle_against_compares_every_tractable_tuple() {
    let dir = tempfile::tempdir().unwrap();
    let illl = sda(&["illl", "610/987", "--qmax", "1024"]);
    assert_eq!(code(&illl), 0);
    let report_path = write_report(dir.path(), "illl.json", &stdout(&illl));
    let out = sda(&["oracle", "610/987", "--Q", "13", "--against", &report_path]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let doc = json(&out);
    let tuples = doc["oracle"]["against"]["tuples"].as_array().unwrap();
    assert_eq!(tuples.len(), 10);
    let certs = doc["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 10);
    assert!(certs.iter().all(|c| c["pass"] == true));
    assert!(certs[0]["name"]
        .as_str()
        .unwrap()
        .starts_with("oracle_dominance[k="));
}

#[test]
fn oracle_against_rejects_mismatched_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let illl = sda(&["illl", "610/987", "--qmax", "1024"]);
    let report_path = write_report(dir.path(), "illl.json", &stdout(&illl));
    let out = sda(&["oracle", "1/2", "--Q", "13", "--against", &report_path]);
    assert_eq!(code(&out), 3);
}

#[test]
fn verify_round_trips_every_command() {
    let dir = tempfile::tempdir().unwrap();
    let illl_out = sda(&["illl", "610/987", "--qmax", "1024"]);
    let illl_path = write_report(dir.path(), "illl.json", &stdout(&illl_out));
    let runs = [
        ("approx.json", sda(&["approx", "610/987", "--eps", "1/10"])),
        ("illl.json", illl_out),
        ("query.json", sda(&["query", "610/987", "--Q", "100"])),
        (
            "oracle.json",
            sda(&["oracle", "610/987", "--Q", "13", "--against", &illl_path]),
        ),
    ];
    for (name, out) in runs {
        assert_eq!(code(&out), 0, "{name} run failed: {}", stderr(&out));
        let path = write_report(dir.path(), name, &stdout(&out));
        let verify = sda(&["verify", &path]);
        assert_eq!(code(&verify), 0, "{name}: {}", stderr(&verify));
        assert!(stdout(&verify).contains("reproduced and passing"));
    }
}

#[test]
fn verify_rejects_tampered_numeric_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = sda(&["illl", "610/987", "--qmax", "1024"]);
    assert_eq!(code(&out), 0);
    let original = stdout(&out);

    // Value changes to a result entry, a recorded error, a certificate
    // inequality, and the predicted round must each be caught.
    let mutations = [
        ("\"34/987\"", "\"35/987\""),
        (
            "\"q\": [\n        \"3\"\n      ]",
            "\"q\": [\n        \"4\"\n      ]",
        ),
        ("= 377/987 <=", "= 378/987 <="),
        ("\"k_prime_predicted\": 10", "\"k_prime_predicted\": 11"),
    ];
    for (needle, replacement) in mutations {
        let tampered = original.replacen(needle, replacement, 1);
        assert_ne!(tampered, original, "mutation {needle:?} did not apply");
        let path = write_report(dir.path(), "tampered.json", &tampered);
        let verify = sda(&["verify", &path]);
        assert_eq!(code(&verify), 4, "mutation {needle:?}: {}", stderr(&verify));
    }
}

#[test]
fn verify_rejects_malformed_documents() {
    let dir = tempfile::tempdir().unwrap();
    for (name, content) in [
        ("garbage.json", "not json at all"),
        ("wrong_schema.json", "{\"schema_version\":\"99\",\"command\":\"approx\",\"config\":{\"n\":1,\"m\":1,\"matrix\":[[\"1/2\"]]},\"results\":[],\"certificates\":[]}"),
    ] {
        let path = write_report(dir.path(), name, content);
        let verify = sda(&["verify", &path]);
        assert_eq!(code(&verify), 2, "{name}: {}", stderr(&verify));
    }
}

#[test]
fn plain_format_renders_human_text() {
    let out = sda(&["illl", "610/987", "--qmax", "1024", "--format", "plain"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("command: illl"));
    assert!(text.contains("k' predicted = 10"));
    assert!(text.contains("all 21 certificates passed"));
    assert!(serde_json::from_str::<Value>(&text).is_err());
}
