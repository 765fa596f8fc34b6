use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strandcalc")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &tempfile::TempDir, name: &str, v: &Value) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn projector_round_trip_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.json");
    let f = file.to_str().unwrap();
    let a = run(&["projector", "build", "--rep", "S", "--out", f]);
    assert_eq!(a.status.code(), Some(0));
    let first = std::fs::read(&file).unwrap();
    let b = run(&["projector", "build", "--rep", "S", "--out", f]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(first, std::fs::read(&file).unwrap());

    let v = run(&["projector", "verify", "--in", f]);
    assert_eq!(v.status.code(), Some(0));
    let r = json(&v);
    assert_eq!(r["result"]["idempotent"], true);
    assert_eq!(r["result"]["symmetric"], true);
    assert_eq!(r["manifest"]["command"], "projector-verify");
    assert!(r["manifest"]["digest"].as_str().unwrap().starts_with("sha256:"));
}

#[test]
fn enumerate_counts_and_usage_errors() {
    let r = json(&run(&["enumerate", "--v", "1", "--rooted"]));
    assert_eq!(r["result"]["count"], 15);
    let r = json(&run(&["enumerate", "--v", "2", "--filter", "no-melon-no-double-tadpole"]));
    assert_eq!(r["result"]["count"], 89);

    assert_eq!(run(&["enumerate", "--v", "0"]).status.code(), Some(2));
    assert_eq!(run(&["enumerate"]).status.code(), Some(2));
    assert_eq!(run(&["amplitude", "--map", "/nonexistent.json", "--rep", "A"]).status.code(), Some(2));
    assert_eq!(run(&["projector", "verify", "--rep", "X"]).status.code(), Some(2));
}

#[test]
fn truncated_enumeration_is_a_budget_exit() {
    let out = run(&["enumerate", "--v", "2", "--rooted", "--cap", "10"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["manifest"]["truncated"], true);
}

#[test]
fn stranded_degree_of_the_double_tadpole() {
    let dir = tempfile::tempdir().unwrap();
    let map: Value = serde_json::from_str(r#"{"vertices": [[0,1,2,3,4,5]], "involution": [[0,1],[2,3],[4,5]], "externals": [], "root": 0}"#).unwrap();
    let straight: Value = serde_json::from_str("[[1,6],[2,7],[3,8],[4,9],[5,10]]").unwrap();
    let m = write(&dir, "m.json", &map);
    let c = write(&dir, "c.json", &Value::Array(vec![straight; 3]));
    let out = run(&["stranded", "degree", "--map", &m, "--config", &c]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out)["result"].clone();
    assert_eq!(r["degree"], r["degree_from_lengths"]);
    let faces = r["faces"].as_i64().unwrap();
    assert_eq!(r["degree"].as_i64().unwrap(), 10 - faces);

    let short = write(&dir, "short.json", &serde_json::json!([[[1, 6], [2, 7], [3, 8], [4, 9], [5, 10]]]));
    assert_eq!(run(&["stranded", "degree", "--map", &m, "--config", &short]).status.code(), Some(2));
}

#[test]
fn stranded_maxfaces_matches_ceiling() {
    let r = json(&run(&["stranded", "maxfaces", "--fragment", "melon", "--external", "unbroken"]));
    assert_eq!(r["result"]["value"], 10);
    assert_eq!(r["result"]["exact"], true);
}

#[test]
fn boundary_distance_and_cap() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(&dir, "a.json", &serde_json::json!({ "vertices": 4, "edges": [[0,1],[0,1],[0,1],[0,1],[0,1],[2,3],[2,3],[2,3],[2,3],[2,3]] }));
    let b = write(&dir, "b.json", &serde_json::json!({ "vertices": 4, "edges": [[0,2],[0,2],[0,2],[0,2],[0,2],[1,3],[1,3],[1,3],[1,3],[1,3]] }));
    let r = json(&run(&["boundary", "distance", "--a", &a, "--b", &b]));
    let d = r["result"]["distance"].as_u64().unwrap();
    assert!(d >= 3);
    let out = run(&["boundary", "distance", "--a", &a, "--b", &b, "--cap", &(d - 1).to_string()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["result"]["distance"], Value::Null);
}

#[test]
fn quick_verification_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify-all", "--budget", "quick", "--report-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let criteria = r["result"]["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 12);
    assert_eq!(criteria[0]["status"], "documented_discrepancy");
    for id in [2, 4, 5, 6, 7] {
        assert_eq!(criteria[id - 1]["status"], "pass", "criterion {id}");
    }
    let saved = std::fs::read_to_string(dir.path().join("verify-all.json")).unwrap();
    assert_eq!(saved.trim_end(), String::from_utf8_lossy(&out.stdout).trim_end());
    assert!(std::fs::read_to_string(dir.path().join("verify-all.md")).unwrap().contains("| 5 |"));
}
