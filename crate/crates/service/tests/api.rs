use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use qgraph_core::discovery::{task_loss, SearchConfig, Task};
use qgraph_core::fixtures::{ghz42_minimal, square_graph};
use qgraph_core::io::{decode_graph, decode_search_template, encode_graph, encode_search_template, GraphFile};
use qgraph_core::{ghz_state, ColoredGraph, Edge, Vertex};
use qgraph_service::{app, app_state, AppState, JobState, ServiceConfig};

struct Harness {
    app: Router,
    state: AppState,
    dir: tempfile::TempDir,
}

fn harness(workers: usize) -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let config = ServiceConfig {
        library_dir: dir.path().join("library"),
        workers,
        job_log: Some(dir.path().join("jobs.jsonl")),
        ..Default::default()
    };
    let state = app_state(&config).unwrap();
    Harness { app: app(state.clone()), state, dir }
}

impl Harness {
    async fn call(&self, method: &str, uri: &str, body: impl Into<String>) -> (StatusCode, String) {
        self.call_with(Request::builder().method(method).uri(uri), body).await
    }

    async fn call_with(&self, req: axum::http::request::Builder, body: impl Into<String>) -> (StatusCode, String) {
        let response = self.app.clone().oneshot(req.body(Body::from(body.into())).unwrap()).await.unwrap();
        let status = response.status();
        let bytes = response.into_body().collect().await.unwrap().to_bytes();
        (status, String::from_utf8(bytes.to_vec()).unwrap())
    }

    async fn json(&self, method: &str, uri: &str, body: impl Into<String>) -> (StatusCode, Value) {
        let (status, text) = self.call(method, uri, body).await;
        (status, serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}")))
    }

    async fn wait_for(&self, id: &str, done: impl Fn(&str) -> bool) -> Value {
        let deadline = Instant::now() + Duration::from_secs(120);
        loop {
            let (status, body) = self.json("GET", &format!("/jobs/{id}"), "").await;
            assert_eq!(status, StatusCode::OK);
            if done(body["state"].as_str().unwrap()) {
                return body;
            }
            assert!(Instant::now() < deadline, "job {id} stuck: {body}");
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
    }

    async fn submit(&self, config: &SearchConfig) -> String {
        let (status, body) = self.json("POST", "/jobs", encode_search_template(config).unwrap()).await;
        assert_eq!(status, StatusCode::ACCEPTED, "{body}");
        body["id"].as_str().unwrap().to_string()
    }
}

fn doc(g: &ColoredGraph) -> String {
    encode_graph(&GraphFile::new(g.clone())).unwrap()
}

/// Parses a server-sent event body into (event name, data) pairs.
fn parse_sse(body: &str) -> Vec<(String, Value)> {
    body.split("\n\n")
        .filter_map(|block| {
            let mut name = None;
            let mut data = None;
            for line in block.lines() {
                if let Some(v) = line.strip_prefix("event:") {
                    name = Some(v.trim().to_string());
                } else if let Some(v) = line.strip_prefix("data:") {
                    data = Some(serde_json::from_str(v.trim()).unwrap());
                }
            }
            Some((name?, data?))
        })
        .collect()
}

fn ghz_config(seed: u64) -> SearchConfig {
    let mut config = SearchConfig::new(
        "ghz42",
        (0..4).map(|i| Vertex::detector(i, 2)).collect(),
        Task::Generation,
        ghz_state(4, 2).unwrap(),
    );
    config.seed = seed;
    config
}

#[tokio::test(flavor = "multi_thread")]
async fn stored_graph_round_trip_and_state() {
    let h = harness(2);
    let mut shuffled = ghz42_minimal();
    shuffled.edges.reverse();
    let (status, stored) = h.call("PUT", "/graphs/ghz42", doc(&shuffled)).await;
    assert_eq!(status, StatusCode::OK, "{stored}");
    assert_eq!(stored, doc(&ghz42_minimal()));

    let (status, fetched) = h.call("GET", "/graphs/ghz42", "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(fetched, stored);

    let (status, state) = h.json("GET", "/graphs/ghz42/state", "").await;
    assert_eq!(status, StatusCode::OK);
    let amps = state["amplitudes"].as_array().unwrap();
    assert_eq!(amps.len(), 2);
    assert_eq!(amps[0]["ket"], "0000");
    assert_eq!(amps[1]["ket"], "1111");
    for a in amps {
        assert!((a["amplitude"]["re"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }
    assert_eq!(state["vanishes"], false);
    assert!((state["norm"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
}

#[tokio::test(flavor = "multi_thread")]
async fn library_listing_and_errors() {
    let h = harness(1);
    for name in ["b", "a"] {
        assert_eq!(h.call("PUT", &format!("/graphs/{name}"), doc(&ghz42_minimal())).await.0, StatusCode::OK);
    }
    let (_, list) = h.json("GET", "/graphs", "").await;
    assert_eq!(list["graphs"], serde_json::json!(["a", "b"]));

    assert_eq!(h.call("DELETE", "/graphs/a", "").await.0, StatusCode::NO_CONTENT);
    assert_eq!(h.call("DELETE", "/graphs/a", "").await.0, StatusCode::NOT_FOUND);
    let (status, body) = h.json("GET", "/graphs/missing", "").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["kind"], "not_found");
    assert_eq!(h.call("GET", "/graphs/missing/state", "").await.0, StatusCode::NOT_FOUND);

    let (status, body) = h.json("PUT", "/graphs/broken", "{\"name\": \"x\",\n \"vertices\": 3}").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["kind"], "parse");
    assert!(body["error"].as_str().unwrap().contains("line 2"), "{body}");

    let mut bad = ColoredGraph::with_detectors("bad", 2, 2);
    bad.edges.push(Edge::new(0, 1, 5, 0, 1.0));
    let (status, body) = h.json("PUT", "/graphs/bad", doc(&bad)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["violations"][0]["kind"], "mode out of range");
    assert_eq!(h.call("GET", "/graphs/bad", "").await.0, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread")]
async fn inline_computations() {
    let h = harness(1);
    let (status, m) = h.json("POST", "/matchings", doc(&square_graph([1.0, 2.0, 3.0, 4.0]))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(m["count"], 2);

    let negative = square_graph([1.0, 1.0, 1.0, -1.0]);
    let (status, report) = h.json("POST", "/matchings?ket=0000", doc(&negative)).await;
    assert_eq!(status, StatusCode::OK, "{report}");
    assert_eq!(report["cancelled"], true);
    assert_eq!(report["interference"][0]["cycles"][0]["edges"].as_array().unwrap().len(), 4);

    let (_, state) = h.json("POST", "/state", doc(&negative)).await;
    assert_eq!(state["vanishes"], true);
    assert_eq!(state["amplitudes"].as_array().unwrap().len(), 0);

    let (status, layout) = h.json("POST", "/layout?seed=3", doc(&square_graph([1.0; 4]))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(layout["positions"].as_array().unwrap().len(), 4);
    assert!(layout["stress"].as_f64().unwrap() < 0.2);

    h.call("PUT", "/graphs/sq", doc(&square_graph([1.0; 4]))).await;
    let (_, stored) = h.json("GET", "/graphs/sq/layout?seed=3", "").await;
    assert_eq!(stored, layout);
    let (_, m) = h.json("GET", "/graphs/sq/matchings", "").await;
    assert_eq!(m["count"], 2);

    let (status, body) = h.json("POST", "/matchings?ket=0?", doc(&negative)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
}

#[tokio::test(flavor = "multi_thread")]
async fn template_download() {
    let h = harness(1);
    h.call("PUT", "/graphs/ghz42", doc(&ghz42_minimal())).await;
    let (status, text) = h.call("GET", "/graphs/ghz42/template?target=ghz:4,2&seed=9&tau=0.05", "").await;
    assert_eq!(status, StatusCode::OK, "{text}");
    let config = decode_search_template(&text).unwrap();
    assert_eq!(config.seed, 9);
    assert_eq!(config.pruning.threshold, 0.05);
    assert_eq!(config.geometry.as_ref().unwrap().len(), 4);
    assert_eq!(config.target, ghz_state(4, 2).unwrap());

    let (status, body) = h.json("GET", "/graphs/ghz42/template", "").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "target required");
    let (status, _) = h.json("GET", "/graphs/ghz42/template?target=ghz:3,2", "").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test(flavor = "multi_thread")]
async fn ghz_search_job_lifecycle() {
    let h = harness(2);
    let id = h.submit(&ghz_config(1)).await;
    let status = h.wait_for(&id, |s| s == "done").await;
    let result = &status["result"];
    let loss = result["loss"].as_f64().unwrap();
    assert!(loss < 0.01, "{status}");
    assert!(result["edge_count"].as_u64().unwrap() <= 8);

    // The stored result recomputes to the reported loss.
    let (_, text) = h.call("GET", &format!("/jobs/{id}/result"), "").await;
    let graph = decode_graph(&text).unwrap().graph;
    let recomputed = task_loss(&graph, &ghz_state(4, 2).unwrap(), Task::Generation).unwrap();
    assert!((recomputed - loss).abs() < 1e-9);

    let (_, body) = h.call("GET", &format!("/jobs/{id}/events"), "").await;
    let events = parse_sse(&body);
    assert_eq!(events.first().unwrap().1["phase"], "optimizing");
    assert_eq!(events.last().unwrap().0, "done");
    assert_eq!(events.last().unwrap().1["loss"].as_f64().unwrap(), loss);
    let terminal = events.iter().filter(|(n, _)| matches!(n.as_str(), "done" | "failed" | "cancelled")).count();
    assert_eq!(terminal, 1);
    let seqs: Vec<u64> = events.iter().map(|(_, d)| d["seq"].as_u64().unwrap()).collect();
    assert_eq!(seqs, (0..events.len() as u64).collect::<Vec<_>>());
    let removals: Vec<u64> =
        events.iter().filter(|(n, _)| n == "edge_removed").map(|(_, d)| d["edge_count"].as_u64().unwrap()).collect();
    assert!(!removals.is_empty());
    assert!(removals.windows(2).all(|w| w[1] < w[0]));

    // Re-subscribing replays the same history; Last-Event-ID resumes after it.
    let (_, again) = h.call("GET", &format!("/jobs/{id}/events"), "").await;
    assert_eq!(parse_sse(&again), events);
    let (_, tail) =
        h.call_with(Request::builder().uri(format!("/jobs/{id}/events")).header("last-event-id", "2"), "").await;
    assert_eq!(parse_sse(&tail), events[3..].to_vec());

    // Cancelling a finished job is acknowledged and changes nothing.
    let (status, ack) = h.json("POST", &format!("/jobs/{id}/cancel"), "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ack["acknowledged"], true);
    assert_eq!(ack["state"], "done");

    let log = std::fs::read_to_string(h.dir.path().join("jobs.jsonl")).unwrap();
    assert!(log.lines().any(|l| l.contains("\"submitted\"")));
    assert!(log.lines().any(|l| l.contains("\"finished\"") && l.contains("\"done\"")));
}

#[tokio::test(flavor = "multi_thread")]
async fn cancel_queued_and_running_jobs() {
    let h = harness(1);
    // Six qutrit detectors: a slow search that occupies the only worker.
    let mut slow = SearchConfig::new(
        "slow",
        (0..6).map(|i| Vertex::detector(i, 3)).collect(),
        Task::Generation,
        ghz_state(6, 3).unwrap(),
    );
    slow.optimizer.max_iterations = 1_000_000;
    slow.optimizer.gradient_tol = 0.0;
    slow.optimizer.loss_tol = 0.0;
    let running = h.submit(&slow).await;
    h.wait_for(&running, |s| s == "running").await;

    let queued = h.submit(&ghz_config(0)).await;
    let (_, status) = h.json("GET", &format!("/jobs/{queued}"), "").await;
    assert_eq!(status["state"], "queued");
    let (_, ack) = h.json("POST", &format!("/jobs/{queued}/cancel"), "").await;
    assert_eq!(ack["state"], "cancelled");
    let (_, status) = h.json("GET", &format!("/jobs/{queued}"), "").await;
    assert_eq!(status["state"], "cancelled");
    assert!(status["result"].is_null());
    let (_, body) = h.call("GET", &format!("/jobs/{queued}/events"), "").await;
    let events = parse_sse(&body);
    assert_eq!(events.len(), 1);
    assert_eq!(events[0].0, "cancelled");

    h.json("POST", &format!("/jobs/{running}/cancel"), "").await;
    let status = h.wait_for(&running, |s| s != "running").await;
    assert_eq!(status["state"], "cancelled");
    let (code, _) = h.call("GET", &format!("/jobs/{running}/result"), "").await;
    assert_eq!(code, StatusCode::CONFLICT);
}

#[tokio::test(flavor = "multi_thread")]
async fn concurrent_jobs_keep_separate_streams() {
    let h = harness(3);
    let configs: Vec<SearchConfig> = (0..3).map(ghz_config).collect();
    let ids: Vec<String> = futures::future::join_all(configs.iter().map(|c| h.submit(c))).await;
    for id in &ids {
        let (_, body) = h.call("GET", &format!("/jobs/{id}/events"), "").await;
        let events = parse_sse(&body);
        let seqs: Vec<u64> = events.iter().map(|(_, d)| d["seq"].as_u64().unwrap()).collect();
        assert_eq!(seqs, (0..events.len() as u64).collect::<Vec<_>>());
        assert_eq!(events.last().unwrap().0, "done");
        assert_eq!(events.iter().filter(|(n, _)| n == "phase").count(), 2);
    }
    let (_, list) = h.json("GET", "/jobs", "").await;
    assert_eq!(list["jobs"].as_array().unwrap().len(), 3);
}

#[tokio::test(flavor = "multi_thread")]
async fn job_errors_and_expiry() {
    let h = harness(1);
    assert_eq!(h.call("GET", "/jobs/nope", "").await.0, StatusCode::NOT_FOUND);
    assert_eq!(h.call("POST", "/jobs/nope/cancel", "").await.0, StatusCode::NOT_FOUND);
    assert_eq!(h.call("GET", "/jobs/nope/events", "").await.0, StatusCode::NOT_FOUND);

    let (status, body) = h.json("POST", "/jobs", "{\"name\": \"t\", \"vertices\": []}").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "target required");

    let odd = SearchConfig::new(
        "odd",
        (0..5).map(|i| Vertex::detector(i, 2)).collect(),
        Task::Generation,
        ghz_state(5, 2).unwrap(),
    );
    let (status, _) = h.json("POST", "/jobs", encode_search_template(&odd).unwrap()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let id = h.submit(&ghz_config(0)).await;
    h.wait_for(&id, |s| s == "done").await;
    assert_eq!(h.state.jobs.sweep(Instant::now()), 0);
    assert_eq!(h.state.jobs.sweep(Instant::now() + Duration::from_secs(25 * 3600)), 1);
    assert_eq!(h.call("GET", &format!("/jobs/{id}"), "").await.0, StatusCode::NOT_FOUND);
    assert!(JobState::Done.is_finished());
}
