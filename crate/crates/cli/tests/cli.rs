use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn chemvis(store: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chemvis"))
        .args(args)
        .env("CHEMVIS_OFFLINE", "1")
        .env("CHEMVIS_STORE", store)
        .env("CHEMVIS_PUBCHEM_BASE", "http://127.0.0.1:9")
        .env_remove("CHEMVIS_CONFIG")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn ingest(store: &Path, names: &[&str]) -> Vec<String> {
    let mut args = vec!["ingest".to_string()];
    args.extend(names.iter().map(|n| fixture(n).display().to_string()));
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    stdout(&chemvis(store, &args)).lines().map(str::to_string).collect()
}

fn json(store: &Path, args: &[&str]) -> Value {
    serde_json::from_str(&stdout(&chemvis(store, args))).unwrap()
}

/// Parse a tab-separated table whose first `skip` lines precede the header.
fn table(text: &str, skip: usize) -> Vec<Vec<String>> {
    text.lines()
        .skip(skip + 1)
        .map(|l| l.split('\t').map(str::to_string).collect())
        .collect()
}

fn num(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[test]
fn ingest_prints_one_id_per_file() {
    let dir = tempfile::tempdir().unwrap();
    let ids = ingest(
        dir.path(),
        &["fig3_input.txt", "fig3_candidate.txt", "corpus/paper01.xml"],
    );
    assert_eq!(ids, vec!["doc-000001", "doc-000002", "doc-000003"]);
}

#[test]
fn unreadable_or_malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = chemvis(dir.path(), &["ingest", "/definitely/not/here.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not/here.txt"));

    let bad = dir.path().join("bad.xml");
    std::fs::write(&bad, "<article><p>unclosed").unwrap();
    let out = chemvis(dir.path(), &["ingest", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = chemvis(dir.path(), &["recommend", "doc-000001"]);
    assert_eq!(out.status.code(), Some(2));
    let out = chemvis(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reingest_yields_new_id_and_same_entities() {
    let dir = tempfile::tempdir().unwrap();
    let ids = ingest(dir.path(), &["morphine.txt", "morphine.txt"]);
    assert_ne!(ids[0], ids[1]);
    let a = json(dir.path(), &["entities", &ids[0], "--format", "json"]);
    let b = json(dir.path(), &["entities", &ids[1], "--format", "json"]);
    assert_eq!(a, b);
    assert_eq!(a.as_array().unwrap().len(), 1);
}

#[test]
fn recommend_k_and_weight_normalization() {
    let dir = tempfile::tempdir().unwrap();
    let ids = ingest(
        dir.path(),
        &["corpus/paper01.xml", "corpus/paper02.txt", "corpus/paper03.xml", "fig3_input.txt"],
    );
    let all = json(dir.path(), &["recommend", &ids[0], "-k", "50", "--format", "json"]);
    assert_eq!(all.as_array().unwrap().len(), 3);
    let scaled = chemvis(
        dir.path(),
        &["recommend", &ids[0], "--w-entity", "2", "--w-text", "2", "--format", "json"],
    );
    let half = chemvis(
        dir.path(),
        &["recommend", &ids[0], "--w-entity", "0.5", "--w-text", "0.5", "--format", "json"],
    );
    assert_eq!(stdout(&scaled), stdout(&half));
}

#[test]
fn compare_figure_three_table() {
    let dir = tempfile::tempdir().unwrap();
    let ids = ingest(dir.path(), &["fig3_input.txt", "fig3_candidate.txt"]);
    let text = stdout(&chemvis(dir.path(), &["compare", &ids[0], &ids[1]]));
    let rows = table(&text, 1);
    let matched: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(matched, vec!["true", "true", "false", "false"]);
    let own = stdout(&chemvis(dir.path(), &["compare", &ids[0], &ids[0]]));
    assert!(table(&own, 1).iter().all(|r| r[1] == "true"));
}

#[test]
fn table_and_json_encode_the_same_data() {
    let dir = tempfile::tempdir().unwrap();
    let ids = ingest(
        dir.path(),
        &["fig3_input.txt", "fig3_candidate.txt", "corpus/paper01.xml", "corpus/paper04.txt"],
    );
    let store = dir.path();

    let j = json(store, &["entities", &ids[2], "--format", "json"]);
    let t = table(&stdout(&chemvis(store, &["entities", &ids[2]])), 0);
    assert_eq!(j.as_array().unwrap().len(), t.len());
    for (row, cells) in j.as_array().unwrap().iter().zip(&t) {
        let expected = [
            num(&row["key"]),
            num(&row["cid"]),
            num(&row["display_name"]),
            num(&row["formula"]),
            num(&row["weight"]),
            num(&row["frequency"]),
            num(&row["status"]),
        ];
        assert_eq!(cells, &expected);
    }

    let j = json(store, &["recommend", &ids[0], "--format", "json"]);
    let t = table(&stdout(&chemvis(store, &["recommend", &ids[0]])), 0);
    assert_eq!(j.as_array().unwrap().len(), t.len());
    for (i, (row, cells)) in j.as_array().unwrap().iter().zip(&t).enumerate() {
        assert_eq!(cells[0], (i + 1).to_string());
        assert_eq!(cells[1], num(&row["candidate"]));
        for (cell, key) in cells[2..5].iter().zip(["score", "entity_component", "text_component"]) {
            assert_eq!(cell.parse::<f64>().unwrap(), row[key].as_f64().unwrap());
        }
        assert_eq!(cells[5], num(&row["title"]));
    }

    let j = json(store, &["compare", &ids[0], &ids[1], "--format", "json"]);
    let text = stdout(&chemvis(store, &["compare", &ids[0], &ids[1]]));
    let head: Vec<&str> = text.lines().next().unwrap().split('\t').collect();
    assert_eq!(head[1], j["input"]);
    assert_eq!(head[3], j["candidate"]);
    assert_eq!(head[5].parse::<f64>().unwrap(), j["entity_similarity"].as_f64().unwrap());
    for (row, cells) in j["rows"].as_array().unwrap().iter().zip(table(&text, 1)) {
        let e = &row["entity"];
        let expected = [
            num(&row["shade"]),
            num(&row["matched"]),
            num(&row["freq_input"]),
            num(&row["freq_candidate"]),
            num(&e["key"]),
            num(&e["display_name"]),
            num(&e["formula"]),
            num(&e["weight"]),
        ];
        assert_eq!(cells, expected);
    }
}

#[test]
fn reindex_reports_clean_store() {
    let dir = tempfile::tempdir().unwrap();
    ingest(dir.path(), &["corpus/paper05.xml", "corpus/paper06.txt"]);
    let out = stdout(&chemvis(dir.path(), &["reindex"]));
    assert!(out.contains("2 documents"));
    assert!(out.contains("0 drift findings"));
}
