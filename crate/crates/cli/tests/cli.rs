use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qgraph_core::io::{decode_graph, decode_search_template, decode_state};
use qgraph_core::{compute_state, fidelity, normalize_state, parse_target};
use serde_json::Value;

fn sample(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../samples").join(name)
}

fn qgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgraph")).args(args).output().expect("spawn qgraph")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn square_has_two_matchings() {
    let o = qgraph(&["matchings", sample("square.graph").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "2\n");
}

#[test]
fn ghz_state_table_and_document() {
    let path = sample("ghz42.graph");
    let o = qgraph(&["state", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let lines: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert!(lines[0].starts_with("|0000>  0.7071067811865"), "{lines:?}");
    assert!(lines[1].starts_with("|1111>  0.7071067811865"), "{lines:?}");
    assert_eq!(lines.len(), 3);

    let o = qgraph(&["state", path.to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0);
    let doc = decode_state(&stdout(&o)).expect("state document decodes");
    assert!((doc.norm - 2f64.sqrt()).abs() < 1e-12);
    let target = parse_target("ghz:4,2").unwrap();
    assert!((fidelity(&doc.state, &target).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn full_ghz_template_prunes_to_a_sparse_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("result.graph");
    let o =
        qgraph(&["discover", sample("ghz42_full.template").to_str().unwrap(), "-o", out.to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["initial_edges"], 24);
    assert!(summary["edge_count"].as_u64().unwrap() <= 8);
    assert!(summary["loss"].as_f64().unwrap() < 0.01);
    assert_eq!(summary["feasible"], true);
    let trace = summary["loss_trace"].as_array().unwrap();
    assert_eq!(trace.len() as u64, summary["edges_removed"].as_u64().unwrap() + 1);

    // The written graph reproduces the reported loss independently.
    let file = decode_graph(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let state = normalize_state(&compute_state(&file.graph).unwrap()).unwrap();
    let loss = 1.0 - fidelity(&state, &parse_target("ghz:4,2").unwrap()).unwrap();
    assert!((loss - summary["loss"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn same_seed_gives_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = qgraph(&[
            "discover",
            sample("ghz42_full.template").to_str().unwrap(),
            "-o",
            out.to_str().unwrap(),
            "--seed",
            "11",
            "--json",
        ]);
        assert_eq!(code(&o), 0);
        (stdout(&o), std::fs::read(out).unwrap())
    };
    assert_eq!(run("a.graph"), run("b.graph"));
}

#[test]
fn template_output_decodes_and_layout_keeps_the_graph() {
    let dir = tempfile::tempdir().unwrap();
    let o = qgraph(&["template", sample("ghz42.graph").to_str().unwrap(), "--target", "ghz:4,2", "--tau", "0.05"]);
    assert_eq!(code(&o), 0);
    let config = decode_search_template(&stdout(&o)).expect("template decodes");
    assert_eq!(config.pruning.threshold, 0.05);

    let out = dir.path().join("laid.graph");
    let o = qgraph(&["layout", sample("square.graph").to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let original = decode_graph(&std::fs::read_to_string(sample("square.graph")).unwrap()).unwrap();
    let laid = decode_graph(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(laid.graph, original.graph);
    assert_eq!(laid.positions.len(), 4);
    assert!(laid.positions.iter().all(Option::is_some));
}

#[test]
fn report_documents_are_json() {
    let square = sample("square.graph");
    let o = qgraph(&["matchings", square.to_str().unwrap(), "--json"]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["count"], 2);

    let o = qgraph(&["cancellations", square.to_str().unwrap(), "--ket", "0000", "--json"]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["contributions"].as_array().unwrap().len(), 2);
    assert_eq!(doc["cancelled"], false);

    let o =
        qgraph(&["verify-analyzer", sample("bell_analyzer.graph").to_str().unwrap(), "--target", "bell:2", "--json"]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["valid"], true);
}

#[test]
fn exit_codes_separate_failure_classes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.graph");
    assert_eq!(code(&qgraph(&["state", missing.to_str().unwrap()])), 1);

    assert_eq!(code(&qgraph(&["state"])), 2);
    assert_eq!(code(&qgraph(&["no-such-command"])), 2);

    let garbage = dir.path().join("garbage.graph");
    std::fs::write(&garbage, "{ not json").unwrap();
    let o = qgraph(&["state", garbage.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());

    // Edge color outside the detector's dimension.
    let text = std::fs::read_to_string(sample("square.graph")).unwrap();
    let mut doc: Value = serde_json::from_str(&text).unwrap();
    doc["edges"][0]["cu"] = 5.into();
    let bad = dir.path().join("bad.graph");
    std::fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();
    let o = qgraph(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(!o.stdout.is_empty());
    assert_eq!(code(&qgraph(&["state", bad.to_str().unwrap()])), 4);

    let o = qgraph(&["verify-analyzer", sample("bell_analyzer.graph").to_str().unwrap(), "--target", "ghz:2,3"]);
    assert_eq!(code(&o), 5, "{}", String::from_utf8_lossy(&o.stderr));

    // Without color-1 edges |1111> is unreachable.
    let o = qgraph(&["template", sample("ghz42.graph").to_str().unwrap(), "--target", "ghz:4,2", "--restarts", "1"]);
    assert_eq!(code(&o), 0);
    let mut doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let edges = doc["initial_edges"].as_array_mut().unwrap();
    edges.retain(|e| e[2] == 0 && e[3] == 0);
    assert_eq!(edges.len(), 2);
    let template = dir.path().join("colorless.template");
    std::fs::write(&template, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = dir.path().join("r.graph");
    let o = qgraph(&["discover", template.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 5, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.exists());
}
