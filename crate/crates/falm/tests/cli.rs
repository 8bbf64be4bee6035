mod common;

use std::process::{Command, Output};

use common::*;

fn falm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_falm")).args(args).env("RUST_LOG", "error").output().unwrap()
}

fn path(p: std::path::PathBuf) -> String {
    p.display().to_string()
}

#[test]
fn too_few_cases_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path().join("viz.json"));
    let o = falm(&[
        "eval", "viz", "--data", &path(fixture("data")), "--templates", &path(fixture("eval/templates.toml")),
        "--cases", "20", "--out", &out,
    ]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    assert_eq!(report["report"]["overall"]["data_match_rate"], 1.0);
    assert!(report["note"].as_str().unwrap().contains("templates"));
}

#[test]
fn errors_exit_with_two() {
    let o = falm(&["eval", "viz", "--data", "/nonexistent", "--templates", "x.toml", "--out", "/tmp/x.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = falm(&["eval", "safety", "--data", &path(fixture("eval")), "--out", "/tmp/x.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--lexicon"));
}

#[test]
fn single_case_rerun_prints_its_result() {
    let o = falm(&[
        "eval", "viz", "--data", &path(fixture("data")), "--templates", &path(fixture("eval/templates.toml")),
        "--out", "/dev/null", "--case", "viz-0007",
    ]);
    assert!(o.status.success());
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["id"], "viz-0007");
    assert_eq!(r["data_match"], true);
}

#[test]
fn query_emits_a_canonical_chart_spec() {
    let cfg = path(fixture("config/falm.toml"));
    let q = "Show me the revenue for Apple, Google and Nvidia since 2014";
    let a = falm(&["query", "--config", &cfg, "--emit", "chart-spec", q]);
    let b = falm(&["query", "--config", &cfg, "--emit", "chart-spec", q]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let spec: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(spec["chart_type"], "line");
    assert_eq!(spec["series_field"], "company");

    let persona = falm(&["query", "--config", &cfg, "--emit", "chart-spec", "Who are you?"]);
    assert_eq!(persona.status.code(), Some(2));
}

#[test]
fn scan_reports_hashes_only() {
    let dir = tempfile::tempdir().unwrap();
    let doc = serde_json::json!({
        "doc_id": "leak", "title": "Leak", "body": "Customer card 4111 1111 1111 1111 was exposed.",
        "published": "2024-01-02", "section": "Tech", "url": "https://news.example.com/leak"
    });
    std::fs::write(dir.path().join("c.jsonl"), format!("{doc}\n")).unwrap();
    let o = falm(&["scan", "--corpus", &path(dir.path().to_path_buf()), "--lexicon", &path(fixture("guardrails/lexicon.txt"))]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("\"leak\"") && out.contains("credit_card"), "{out}");
    assert!(!out.contains("4111"));
}

#[test]
fn gen_fixtures_reproduces_the_committed_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("guardrails")).unwrap();
    std::fs::copy(fixture("guardrails/lexicon.txt"), dir.path().join("guardrails/lexicon.txt")).unwrap();
    let o = falm(&["gen-fixtures", "--root", &path(dir.path().to_path_buf())]);
    assert!(o.status.success());
    for rel in ["data/g500_small.csv", "corpus/corpus.jsonl", "eval/harmful_prompts.jsonl"] {
        assert_eq!(std::fs::read(dir.path().join(rel)).unwrap(), std::fs::read(fixture(rel)).unwrap(), "{rel}");
    }
}

#[test]
fn trends_command_uses_the_given_range() {
    let o = falm(&[
        "trends", "--topic", "inflation", "--scale", "month", "--from", "2022-01-01", "--to", "2022-06-30", "--corpus",
        &path(fixture("corpus")),
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["series"]["buckets"].as_array().unwrap().len(), 6);
}
