use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use brain_core::config::BrainConfig;
use brain_core::engine::Engine;
use brain_core::exec::Execution;
use brain_core::store::DataDir;
use brain_server::{router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const FEED: &str = r#"{"source":"kb","source_version":"1","back_pointer":"test"}
{"src":{"name":"Human","type":"Concept"},"edge":"CanUse","dst":{"name":"Cup","type":"Concept"}}
{"src":{"name":"Cup","type":"Concept"},"edge":"HasAffordance","dst":{"name":"pourable","type":"Affordance"}}
"#;

fn app(dir: &std::path::Path) -> Router {
    let engine = Engine::open_with(DataDir::new(dir), BrainConfig::default(), Execution::Sequential).unwrap();
    router(AppState::new(engine), None)
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Value, String) {
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let ctype = res
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_owned())
        .unwrap_or_default();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let text = String::from_utf8(bytes.to_vec()).unwrap();
    let json = serde_json::from_str(&text).unwrap_or(Value::Null);
    (status, json, ctype)
}

fn post(uri: &str, body: impl Into<String>) -> Request<Body> {
    Request::post(uri).body(Body::from(body.into())).unwrap()
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

#[tokio::test]
async fn feed_query_feedback_roundtrip() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path());
    let (s, report, _) = send(&app, post("/api/feeds", FEED)).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(report["nodes_added"], 3);
    assert_eq!(report["edges_added"], 2);
    let seq = report["seq"].as_u64().unwrap();

    let q = json!({ "program": "fetch ({name:`Human'})→[`CanUse']→(v)" }).to_string();
    let (s, out, _) = send(&app, post("/api/query", q)).await;
    assert_eq!(s, StatusCode::OK, "{out}");
    assert!(out["snapshot_seq"].as_u64().unwrap() >= seq);
    assert_eq!(out["values"][0]["name"], "Cup");
    assert_eq!(out["truncated"], false);
    let cup = out["values"][0]["handle"].as_str().unwrap().to_owned();
    let before = out["values"][0]["belief"].as_f64().unwrap();

    let fb = json!({ "target": cup, "verdict": "approve" }).to_string();
    let req = Request::post("/api/feedback").header("x-user", "ann").body(Body::from(fb)).unwrap();
    let (s, out, _) = send(&app, req).await;
    assert_eq!(s, StatusCode::OK);
    assert!(out["belief"].as_f64().unwrap() > before);

    let (s, node, _) = send(&app, get(&format!("/api/nodes/{cup}"))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(node["approvals"], 1);
    assert_eq!(node["degree"], 2);
    let (s, by_name, _) = send(&app, get("/api/nodes/cup")).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(by_name["handle"], node["handle"]);
}

#[tokio::test]
async fn query_truncates_to_max_results() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path());
    send(&app, post("/api/feeds", FEED)).await;
    let q = json!({ "program": "fetch (u)", "max_results": 2 }).to_string();
    let (s, out, _) = send(&app, post("/api/query", q)).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(out["values"].as_array().unwrap().len(), 2);
    assert_eq!(out["truncated"], true);
}

#[tokio::test]
async fn error_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path());
    let (s, e, _) = send(&app, post("/api/feeds", "{}")).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["line"], 1);

    let header_only = r#"{"source":"kb","source_version":"1","back_pointer":"x"}"#;
    let (s, e, _) = send(&app, post("/api/feeds", header_only)).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(e["message"].as_str().unwrap().contains("assertions nonempty"));

    let unknown = format!(
        "{header_only}\n{}\n",
        r#"{"src":{"name":"a","type":"T"},"edge":"Frobs","dst":{"name":"b","type":"T"}}"#
    );
    let (s, e, _) = send(&app, post("/api/feeds", unknown)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["edge_types"], json!(["Frobs"]));

    let q = json!({ "program": "fetch((" }).to_string();
    let (s, e, _) = send(&app, post("/api/query", q)).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["code"], "syntax_error");
    assert_eq!(e["position"]["line"], 1);
    assert!(e["expected"].as_array().is_some_and(|x| !x.is_empty()));

    let q = json!({ "program": "nope 1" }).to_string();
    let (s, e, _) = send(&app, post("/api/query", q)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{e}");

    let fb = json!({ "target": "n9_9", "verdict": "approve", "user": "u" }).to_string();
    assert_eq!(send(&app, post("/api/feedback", fb)).await.0, StatusCode::NOT_FOUND);
    let fb = json!({ "target": "n9_9", "verdict": "approve" }).to_string();
    assert_eq!(send(&app, post("/api/feedback", fb)).await.0, StatusCode::BAD_REQUEST);

    assert_eq!(send(&app, get("/api/nodes/ghost")).await.0, StatusCode::NOT_FOUND);
    assert_eq!(send(&app, get("/api/subgraph?center=ghost")).await.0, StatusCode::NOT_FOUND);
    send(&app, post("/api/feeds", FEED)).await;
    assert_eq!(
        send(&app, get("/api/subgraph?center=Cup&radius=-1")).await.0,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(send(&app, get("/api/nowhere")).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn graph_ops_apply_or_reject() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path());
    send(&app, post("/api/feeds", FEED)).await;
    let add = json!({ "action": "add_node", "name": "Spoon", "type": "Concept" }).to_string();
    let req = Request::post("/api/graph-ops").header("x-user", "bo").body(Body::from(add)).unwrap();
    let (s, out, _) = send(&app, req).await;
    assert_eq!(s, StatusCode::OK, "{out}");
    assert_eq!(out["status"], "applied");
    let (_, node, _) = send(&app, get("/api/nodes/Spoon")).await;
    assert_eq!(node["src"], "crowd");

    let bad = json!({ "action": "delete_node", "handle": "n77_0", "proposer": "bo" }).to_string();
    let (s, out, _) = send(&app, post("/api/graph-ops", bad)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(out["status"], "rejected");
    assert!(out["reason"].is_string());

    let anon = json!({ "action": "add_node", "name": "Fork", "type": "Concept" }).to_string();
    assert_eq!(send(&app, post("/api/graph-ops", anon)).await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn subgraph_radius_and_star() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path());
    let mut feed = String::from(r#"{"source":"kb","source_version":"1","back_pointer":"star"}"#);
    for i in 0..5 {
        feed.push_str(&format!(
            "\n{{\"src\":{{\"name\":\"hub\",\"type\":\"T\"}},\"edge\":\"IsTypeOf\",\"dst\":{{\"name\":\"leaf{i}\",\"type\":\"T\"}}}}"
        ));
    }
    let (s, _, _) = send(&app, post("/api/feeds", feed)).await;
    assert_eq!(s, StatusCode::OK);

    let (s, sg, _) = send(&app, get("/api/subgraph?center=hub&radius=0")).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(sg["nodes"].as_array().unwrap().len(), 1);
    assert_eq!(sg["edges"].as_array().unwrap().len(), 0);

    let (_, sg, _) = send(&app, get("/api/subgraph?center=hub&radius=1")).await;
    assert_eq!(sg["nodes"].as_array().unwrap().len(), 6);
    assert_eq!(sg["edges"].as_array().unwrap().len(), 5);
    assert_eq!(sg["nodes"][0]["degree"], 5);
    assert_eq!(sg["truncated"], false);

    let (_, sg, _) = send(&app, get("/api/subgraph?center=leaf0&radius=2&limit=3")).await;
    assert_eq!(sg["nodes"].as_array().unwrap().len(), 3);
    assert_eq!(sg["truncated"], true);

    let (_, stats, _) = send(&app, get("/api/stats")).await;
    assert_eq!(stats["node_count"], 6);
    assert_eq!(stats["edge_count"], 5);
    assert_eq!(stats["histogram"]["1"], 5);
    assert_eq!(stats["histogram"]["5"], 1);
}

#[tokio::test]
async fn ui_routes() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path());
    let (s, _, ctype) = send(&app, get("/")).await;
    assert_eq!(s, StatusCode::OK);
    assert!(ctype.starts_with("text/html"));

    let ui = tempfile::tempdir().unwrap();
    std::fs::write(ui.path().join("index.html"), "<p>curator</p>").unwrap();
    let engine = Engine::open_with(
        DataDir::new(tmp.path().join("other")),
        BrainConfig::default(),
        Execution::Sequential,
    )
    .unwrap();
    let app = router(AppState::new(engine), Some(ui.path().to_owned()));
    let res = app.clone().oneshot(get("/")).await.unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    let body = res.into_body().collect().await.unwrap().to_bytes();
    assert_eq!(&body[..], b"<p>curator</p>");
    assert_eq!(send(&app, get("/api/stats")).await.0, StatusCode::OK);
}
