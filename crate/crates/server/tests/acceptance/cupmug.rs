use std::collections::BTreeSet;
use std::fs;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use brain_core::config::BrainConfig;
use brain_core::engine::Engine;
use brain_core::exec::Execution;
use brain_core::store::DataDir;
use brain_server::{router, AppState};
use brain_testkit::fixtures;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use super::ensure;

const COUNTS: [&str; 4] = ["nodes_added", "edges_added", "splits_applied", "merges_applied"];

pub fn run() -> super::Outcome {
    let dir = fixtures().join("cupmug");
    let expected: Value = serde_json::from_str(&fs::read_to_string(dir.join("expected.json")).unwrap()).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    fs::copy(fixtures().join("sources.toml"), tmp.path().join("sources.toml")).unwrap();
    let engine = Engine::open_with(DataDir::new(tmp.path()), BrainConfig::default(), Execution::default())
        .map_err(|e| e.to_string())?;
    let state = AppState::new(engine);
    let reader = state.reader().clone();
    let app = router(state, None);
    let rt = tokio::runtime::Runtime::new().unwrap();

    for (i, stage) in ["stage1.jsonl", "stage2.jsonl"].iter().enumerate() {
        let body = fs::read_to_string(dir.join(stage)).unwrap();
        let req = Request::post("/api/feeds").body(Body::from(body)).unwrap();
        let (status, report) = rt.block_on(async {
            let res = app.clone().oneshot(req).await.unwrap();
            let status = res.status();
            let bytes = res.into_body().collect().await.unwrap().to_bytes();
            (status, serde_json::from_slice::<Value>(&bytes).unwrap())
        });
        ensure(status == StatusCode::OK, || format!("{stage}: HTTP {status}: {report}"))?;
        for k in COUNTS {
            let want = &expected["responses"][i][k];
            ensure(&report[k] == want, || format!("{stage}: {k} = {}, want {want}", report[k]))?;
        }
    }

    let view = reader.current();
    let g = &view.graph;
    let nodes: BTreeSet<(String, String)> = g.nodes().map(|n| (n.name.clone(), n.node_type.clone())).collect();
    let name = |h| g.node(h).unwrap().name.clone();
    let edges: BTreeSet<(String, String, String)> =
        g.edges().map(|e| (name(&e.src), e.edge_type.clone(), name(&e.dst))).collect();
    let want_nodes: BTreeSet<(String, String)> = serde_json::from_value(expected["nodes"].clone()).unwrap();
    let want_edges: BTreeSet<(String, String, String)> = serde_json::from_value(expected["edges"].clone()).unwrap();
    ensure(g.node_count() == want_nodes.len() && nodes == want_nodes, || {
        format!("nodes {nodes:?}, want {want_nodes:?}")
    })?;
    ensure(g.edge_count() == want_edges.len() && edges == want_edges, || {
        format!("edges {edges:?}, want {want_edges:?}")
    })?;
    let media: BTreeSet<String> = g.nodes().filter_map(|n| n.media_ref.clone()).collect();
    ensure(media.len() == 4, || format!("image media refs {media:?}"))?;
    Ok(format!(
        "{} nodes and {} edges match the golden graph after split + merge",
        nodes.len(),
        edges.len()
    ))
}
