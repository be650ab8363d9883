mod common;

use std::path::Path;

use common::{load, store, workdir, CATALOG_FILE};
use serde_json::Value;
use store_core::fixtures::erp;
use store_core::workflow::StepStatus;

fn erp_dir() -> tempfile::TempDir {
    let dir = workdir();
    std::fs::write(dir.path().join("project.store.json"), erp::PROJECT_FILE).unwrap();
    dir
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = store(dir, args);
    assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
    out.stdout
}

fn fails(dir: &Path, args: &[&str], code: &str) -> String {
    let out = store(dir, args);
    assert_eq!(out.code, 1, "{args:?}: {}", out.stdout);
    assert!(out.stderr.starts_with(&format!("error: {code}:")), "{}", out.stderr);
    out.stderr
}

#[test]
fn fresh_project_status() {
    let dir = workdir();
    ok(dir.path(), &["init", "Demo"]);
    let text = ok(dir.path(), &["step", "status"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 10);
    assert!(lines[0].contains("InProgress"));
    assert!(lines[1..].iter().all(|l| l.contains("Locked")));
    assert_eq!(load(dir.path()).project_id, "demo");
}

#[test]
fn rank_prints_published_order() {
    let dir = erp_dir();
    let text = ok(dir.path(), &["risk", "rank"]);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 12);
    let got: Vec<(&str, &str)> = rows.iter().map(|r| (r[0], r[1])).collect();
    let want: Vec<(&str, String)> = erp::RISK_RANKING
        .iter()
        .map(|(t, s)| (*t, store_core::risk::format_tenths(*s)))
        .collect();
    for (g, w) in got.iter().zip(&want) {
        assert_eq!(g.0, w.0);
        assert_eq!(g.1, w.1);
    }
}

#[test]
fn premature_completion_reports_failed_checks() {
    let dir = workdir();
    let d = dir.path();
    ok(d, &["init", "x"]);
    ok(d, &["goal", "add", "g"]);
    ok(d, &["step", "complete", "1"]);
    ok(d, &["stakeholder", "add", "boss", "--priority", "critical"]);
    ok(d, &["step", "complete", "2"]);
    ok(d, &["agree", "G1", "SH1"]);
    ok(d, &["step", "complete", "3"]);
    ok(d, &["asset", "add", "db", "--cia", "c,i", "--priority", "high"]);
    ok(d, &["step", "complete", "4"]);
    ok(d, &["point", "add", "login form", "--kind", "poa"]);
    ok(d, &["point", "add", "admins are trusted", "--kind", "pob"]);
    fails(d, &["step", "complete", "5"], "ExitChecksFailed");
    ok(d, &["point", "none", "--kind", "poc"]);
    ok(d, &["point", "none", "--kind", "pod"]);
    ok(d, &["step", "complete", "5"]);
    let err = fails(d, &["step", "complete", "6"], "ExitChecksFailed");
    assert!(err.contains("threats-nonempty"));
    // A threat without STRIDE tags never enters the project.
    fails(d, &["threat", "add", "untagged", "--assets", "A1"], "InvariantViolation");
    fails(d, &["step", "complete", "8"], "StepNotCurrent");
    ok(d, &["threat", "add", "sql injection", "--stride", "T", "--assets", "A1"]);
    ok(d, &["step", "complete", "6"]);
    assert_eq!(load(d).step_status(7), Some(StepStatus::InProgress));
}

#[test]
fn edits_reopen_and_mark_downstream_stale() {
    let dir = erp_dir();
    let d = dir.path();
    ok(d, &["goal", "add", "backups are encrypted"]);
    let p = load(d);
    assert_eq!(p.goals.last().unwrap().id, "G8");
    assert_eq!(p.step_status(1), Some(StepStatus::InProgress));
    assert!((2..=7).all(|k| p.step_status(k) == Some(StepStatus::Stale)));
    fails(d, &["step", "reopen", "3"], "StepNotCurrent");
    fails(d, &["step", "complete", "2"], "StepNotCurrent");
}

#[test]
fn init_refuses_to_overwrite() {
    let dir = workdir();
    ok(dir.path(), &["init", "a"]);
    fails(dir.path(), &["init", "b"], "IoFailure");
    ok(dir.path(), &["init", "b", "--force", "--id", "bee"]);
    assert_eq!(load(dir.path()).project_id, "bee");
}

#[test]
fn missing_project_file() {
    let dir = workdir();
    let err = fails(dir.path(), &["goal", "list"], "IoFailure");
    assert!(err.contains("store init"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = workdir();
    for args in [
        &["frobnicate"][..],
        &["stakeholder", "add", "x"],
        &["risk", "set", "T1"],
        &["risk", "set", "T1", "--dread", "1,2,3"],
        &["risk", "set", "T1", "--dread", "1,1,1,1,1", "--simple", "1,1"],
        &["doc", "export", "nonsense"],
        &["point", "add", "x", "--kind", "poz"],
        &["--format", "yaml", "step", "status"],
    ] {
        let out = store(dir.path(), args);
        assert_eq!(out.code, 2, "{args:?}");
        assert!(out.stdout.is_empty());
    }
    assert_eq!(store(dir.path(), &["--help"]).code, 0);
}

#[test]
fn failed_mutation_leaves_file_untouched() {
    let dir = erp_dir();
    let path = dir.path().join("project.store.json");
    let before = std::fs::read(&path).unwrap();
    fails(dir.path(), &["risk", "set", "T1", "--dread", "11,0,0,0,0"], "OutOfRange");
    fails(dir.path(), &["asset", "rm", "A2"], "StillReferenced");
    fails(dir.path(), &["threat", "add", "t", "--stride", "S", "--assets", "A99"], "DanglingReference");
    fails(dir.path(), &["goal", "add", "dup", "--id", "G1"], "DuplicateId");
    assert_eq!(std::fs::read(&path).unwrap(), before);
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "project.store.json" && n != CATALOG_FILE)
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn json_errors_carry_code_and_details() {
    let dir = erp_dir();
    let out = store(dir.path(), &["--format", "json", "asset", "rm", "A2"]);
    assert_eq!(out.code, 1);
    let v: Value = serde_json::from_str(&out.stderr).unwrap();
    assert_eq!(v["code"], "StillReferenced");
    assert_eq!(v["details"]["referenced_by"], serde_json::json!(["T2", "T5", "T9"]));
}

#[test]
fn elicit_through_cli() {
    let dir = erp_dir();
    let text = ok(dir.path(), &["elicit", "--catalog", CATALOG_FILE]);
    assert!(text.starts_with("T1 -> SR1\tUse of prepared statements with parameterized queries"));
    assert!(text.trim_end().ends_with("12 created, 0 need manual entry"));
    let again = ok(dir.path(), &["elicit", "--catalog", CATALOG_FILE]);
    assert!(again.trim_end().ends_with("0 created, 0 need manual entry"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"catalog_id\": ").unwrap();
    fails(dir.path(), &["elicit", "--catalog", bad.to_str().unwrap()], "SyntaxError");
    let err = fails(dir.path(), &["elicit", "--catalog", "/nonexistent/c.json"], "IoFailure");
    assert!(err.contains("/nonexistent/c.json"), "{err}");
}

#[test]
fn document_requires_validated_requirements() {
    let dir = erp_dir();
    let err = fails(dir.path(), &["doc", "srs", "--out", "x.md"], "StepNotReady");
    assert!(err.contains("[8, 9]"), "{err}");
}

#[test]
fn exports_and_reports() {
    let dir = erp_dir();
    let threats = ok(dir.path(), &["doc", "export", "threats"]);
    assert!(threats.starts_with("ID,Threat,Description,S,T,R,I,D,E,Mitigated,Assets\n"));
    assert_eq!(threats.lines().count(), 13);
    let surface = ok(dir.path(), &["report", "surface"]);
    assert!(surface.contains("PoA\t17") && surface.contains("PoD\t5") && surface.contains("total\t32"));
    let coverage = ok(dir.path(), &["--format", "json", "report", "coverage"]);
    let v: Value = serde_json::from_str(&coverage).unwrap();
    assert_eq!(v["assets_without_threats"].as_array().unwrap().len(), 6);
    assert_eq!(v["threats_without_requirements"].as_array().unwrap().len(), 12);
}

#[test]
fn suggestions() {
    let dir = erp_dir();
    let s = ok(dir.path(), &["suggest", "stride", "attacker", "may", "inject", "SQL"]);
    assert!(s.starts_with("T\t"));
    let r = ok(dir.path(), &["suggest", "req", "T1", "--catalog", CATALOG_FILE, "--limit", "2"]);
    let first = r.lines().next().unwrap();
    assert!(first.contains("sql-injection"), "{first}");
    assert_eq!(r.lines().count(), 2);
}

#[test]
fn tag_link_and_exclude() {
    let dir = erp_dir();
    let d = dir.path();
    ok(d, &["threat", "tag", "T3", "S,E"]);
    ok(d, &["threat", "link", "T3", "--assets", "A1", "--points", "PA1"]);
    ok(d, &["risk", "exclude", "T3", "--rationale", "accepted"]);
    let p = load(d);
    let t = p.threat("T3").unwrap();
    assert_eq!(t.stride.letters(), "SE");
    assert_eq!(t.asset_refs, ["A11", "A1"]);
    assert_eq!(t.point_refs, ["PA1"]);
    assert!(p.assessment("T3").unwrap().excluded);
    assert_eq!(p.step_status(6), Some(StepStatus::InProgress));
    assert_eq!(p.step_status(7), Some(StepStatus::Stale));
}
