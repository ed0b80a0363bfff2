use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fdahp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdahp")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn exported(format: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = fdahp(&["export", "--dir", p(dir.path()), "--format", format]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    dir
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).expect("stdout is JSON")
}

#[test]
fn screen_reports_eleven_selected() {
    let dir = exported("csv");
    let out = fdahp(&["screen", "--ratings", p(&dir.path().join("ratings.csv")), "--threshold", "mean"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["screening"]["selected"], 11);
    assert_eq!(report["screening"]["rejected"], 5);
    assert_eq!(report["command"], "screen");
}

#[test]
fn screen_missing_file_is_an_io_error() {
    let out = fdahp(&["screen", "--ratings", "/definitely/not/here.csv"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("here.csv"));
}

#[test]
fn screen_rating_outside_the_scale_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "barrier_id,expert_id,rating\nB1,E1,7\nB1,E2,11\n").unwrap();
    let out = fdahp(&["screen", "--ratings", p(&path), "--scale", "delphi-10"]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains(":3:") && err.contains("rating"), "{err}");
}

#[test]
fn screen_malformed_row_names_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "barrier_id,expert_id,l,m,u\nB1,E1,1,2,3\nB1,E2,1,x,3\n").unwrap();
    let out = fdahp(&["screen", "--ratings", p(&path)]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains(":3:") && err.contains("`m`"), "{err}");
}

#[test]
fn rank_published_matrix_leniently() {
    let dir = exported("csv");
    let out = fdahp(&["rank", "--matrix", p(&dir.path().join("matrix.csv")), "--mode", "lenient"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    let order: Vec<&str> = report["ranking"]["order"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(order, ["B10", "B9", "B7", "B5", "B3", "B2", "B4", "B1", "B8", "B6", "B11"]);
    assert_eq!(report["warnings"].as_array().unwrap().len(), 3);
}

#[test]
fn rank_published_matrix_strictly_names_the_cell() {
    let dir = exported("csv");
    let out = fdahp(&["rank", "--matrix", p(&dir.path().join("matrix.csv")), "--mode", "strict"]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("(B8, B4)"), "{err}");
    assert!(stdout(&out).is_empty());
}

#[test]
fn rank_all_ones_matrix_is_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("identity3.csv");
    fs::write(&path, "row_id,col_id,l,m,u\nA,B,1,1,1\nA,C,1,1,1\nB,C,1,1,1\n").unwrap();
    let out = fdahp(&["rank", "--matrix", p(&path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for c in json(&out)["ranking"]["criteria"].as_array().unwrap() {
        assert_eq!(c["normalized_weight"].as_f64().unwrap(), fdahp::report::round_sig(1.0 / 3.0, 6));
    }
}

#[test]
fn rank_json_matrix_and_csv_emit() {
    let dir = exported("json");
    let out = fdahp(&["rank", "--matrix", p(&dir.path().join("matrix.json")), "--emit", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("criterion_id,"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn pipeline_reproduces_both_stages() {
    let dir = exported("csv");
    let out = fdahp(&["pipeline", "--config", p(&dir.path().join("pipeline.json"))]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["screening"]["selected"], 11);
    assert_eq!(report["ranking"]["order"][0], "B10");
    assert_eq!(report["renumbering"][9]["original"], "B15");
    assert_eq!(report["renumbering"][9]["criterion"], "B10");
    assert!(report.get("timing_ms").is_none());
}

#[test]
fn pipeline_reports_are_byte_identical_across_runs() {
    let dir = exported("csv");
    let config = dir.path().join("pipeline.json");
    let a = fdahp(&["pipeline", "--config", p(&config)]);
    let b = fdahp(&["pipeline", "--config", p(&config)]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn pipeline_output_path_and_markdown() {
    let dir = exported("json");
    let target = dir.path().join("out/report.md");
    let out =
        fdahp(&["pipeline", "--config", p(&dir.path().join("pipeline.json")), "--emit", "md", "--output", p(&target)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let md = fs::read_to_string(target).unwrap();
    assert!(md.contains("| Barrier | Name | Weight | Ranking |"));
    assert!(md.contains("| B10 | Lack of top management's commitment to implementing new technology | 0.2117 | 1 |"));
}

#[test]
fn pipeline_with_unreachable_threshold_fails() {
    let dir = exported("csv");
    let config = dir.path().join("pipeline.json");
    let mut v: Value = serde_json::from_str(&fs::read_to_string(&config).unwrap()).unwrap();
    v["threshold"] = serde_json::json!({ "fixed": 100.0 });
    fs::write(&config, v.to_string()).unwrap();
    let out = fdahp(&["pipeline", "--config", p(&config)]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("renumbering stage") && err.contains("empty selection"), "{err}");
}

#[test]
fn pipeline_with_one_barrier_gives_unit_weight() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("r.csv"), "barrier_id,expert_id,rating\nX,E1,7\nX,E2,9\n").unwrap();
    fs::write(dir.path().join("m.csv"), "row_id,col_id,l,m,u\n").unwrap();
    fs::write(
        dir.path().join("p.json"),
        r#"{"ratings": {"path": "r.csv"}, "threshold": "mean", "matrix": {"path": "m.csv"}}"#,
    )
    .unwrap();
    let out = fdahp(&["pipeline", "--config", p(&dir.path().join("p.json"))]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["ranking"]["criteria"][0]["id"], "B1");
    assert_eq!(report["ranking"]["criteria"][0]["normalized_weight"], 1.0);
}

#[test]
fn pipeline_missing_config_is_io() {
    let out = fdahp(&["pipeline", "--config", "/no/such/pipeline.json"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn timing_is_opt_in() {
    let dir = exported("csv");
    let out = fdahp(&["--timing", "rank", "--matrix", p(&dir.path().join("matrix.csv")), "--mode", "lenient"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["timing_ms"].is_number());
}

#[test]
fn paper_verify_passes_on_embedded_data() {
    let out = fdahp(&["paper-verify"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("modal-multiplier"));
    assert!(text.contains("matrix-non-monotone"));
    assert!(text.contains("All 8 checks passed."));
}

#[test]
fn paper_verify_json_is_a_check_list() {
    let out = fdahp(&["paper-verify", "--emit", "json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 8);
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn paper_verify_accepts_an_untouched_export() {
    let dir = exported("csv");
    let out = fdahp(&["paper-verify", "--data-dir", p(dir.path())]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn paper_verify_flags_a_perturbed_cell() {
    let dir = exported("csv");
    let path = dir.path().join("matrix.csv");
    let text = fs::read_to_string(&path).unwrap();
    let tampered = text.replace("B10,B1,9,9,9", "B10,B1,9,9.5,9.5");
    assert_ne!(text, tampered);
    fs::write(&path, tampered).unwrap();
    let out = fdahp(&["paper-verify", "--data-dir", p(dir.path())]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAILED checks: 3"), "{}", stdout(&out));
    assert!(stderr(&out).contains("check 3"));
}

#[test]
fn paper_verify_flags_a_perturbed_rating() {
    let dir = exported("csv");
    let path = dir.path().join("ratings.csv");
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, text.replacen("B1,E1,6,7,8", "B1,E1,6,7.5,8", 1)).unwrap();
    let out = fdahp(&["paper-verify", "--data-dir", p(dir.path())]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("[FAIL] 1."));
}

#[test]
fn unknown_flag_value_is_a_usage_error() {
    let out = fdahp(&["screen", "--ratings", "x.csv", "--mode", "sloppy"]);
    assert_eq!(code(&out), 2);
}
