use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use brain_core::engine::IngestReport;
use brain_core::eval::{evaluate, Value};
use brain_core::feedback::{EditStatus, GraphEditProposal};
use brain_core::graph::{Graph, NodeHandle, Verdict};
use brain_core::rql::parse;
use serde::Deserialize;
use serde_json::{json, Value as JsonValue};

use crate::{subgraph, ApiError, AppState, DEFAULT_MAX_RESULTS, USER_HEADER};

type ApiResult<T> = Result<T, ApiError>;

fn header_user(headers: &HeaderMap) -> Option<String> {
    headers
        .get(USER_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
}

fn json_body<T: for<'de> Deserialize<'de>>(body: &str) -> ApiResult<T> {
    serde_json::from_str(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

pub async fn post_feed(State(state): State<AppState>, body: String) -> ApiResult<Json<IngestReport>> {
    let report = state.write(move |engine| Ok(engine.ingest_text(&body)?)).await?;
    Ok(Json(report))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryRequest {
    program: String,
    #[serde(default)]
    max_results: Option<usize>,
}

pub async fn post_query(State(state): State<AppState>, body: String) -> ApiResult<Json<JsonValue>> {
    let req: QueryRequest = json_body(&body)?;
    let program = parse(&req.program)?;
    let limit = req.max_results.unwrap_or(DEFAULT_MAX_RESULTS);
    let view = state.reader.current();
    let plugins = state.plugins.clone();
    let opts = state.eval;
    let started = Instant::now();
    let out = tokio::task::spawn_blocking(move || {
        let result = evaluate(&program, &view.graph, &BTreeMap::new(), &plugins, opts);
        result.map(|ev| {
            let (value, truncated) = match ev.value {
                Value::List(mut xs) if xs.len() > limit => {
                    xs.truncate(limit);
                    (Value::List(xs), true)
                }
                v => (v, false),
            };
            json!({
                "values": value.to_json(&view.graph),
                "truncated": truncated,
                "snapshot_seq": view.seq,
                "warnings": ev.warnings,
            })
        })
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?;
    let mut out = out?;
    out["elapsed_ms"] = (started.elapsed().as_secs_f64() * 1000.0).into();
    Ok(Json(out))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FeedbackRequest {
    target: String,
    verdict: Verdict,
    #[serde(default)]
    user: Option<String>,
}

pub async fn post_feedback(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: String,
) -> ApiResult<Json<JsonValue>> {
    let req: FeedbackRequest = json_body(&body)?;
    let user = req
        .user
        .filter(|u| !u.trim().is_empty())
        .or_else(|| header_user(&headers))
        .ok_or_else(|| ApiError::bad_request(format!("feedback needs a user (body field or {USER_HEADER} header)")))?;
    let target = req.target.clone();
    let belief = state
        .write(move |engine| Ok(engine.feedback(&req.target, req.verdict, &user)?))
        .await?;
    Ok(Json(json!({ "target": target, "belief": belief })))
}

pub async fn post_graph_op(State(state): State<AppState>, headers: HeaderMap, body: String) -> ApiResult<Response> {
    let mut raw: JsonValue = json_body(&body)?;
    let Some(obj) = raw.as_object_mut() else {
        return Err(ApiError::bad_request("graph op must be a JSON object"));
    };
    if !obj.contains_key("proposer") {
        let user = header_user(&headers)
            .ok_or_else(|| ApiError::bad_request(format!("graph op needs a proposer (body field or {USER_HEADER} header)")))?;
        obj.insert("proposer".into(), user.into());
    }
    let proposal: GraphEditProposal =
        serde_json::from_value(raw).map_err(|e| ApiError::bad_request(format!("invalid graph op: {e}")))?;
    let (proposal, seq) = state
        .write(move |engine| {
            let p = engine.edit(proposal)?;
            Ok((p, engine.view().seq))
        })
        .await?;
    Ok(match proposal.status {
        EditStatus::Rejected => (
            StatusCode::UNPROCESSABLE_ENTITY,
            Json(json!({ "status": "rejected", "reason": proposal.reason })),
        )
            .into_response(),
        _ => Json(json!({ "status": "applied", "seq": seq })).into_response(),
    })
}

fn resolve_node(graph: &Graph, key: &str) -> Option<NodeHandle> {
    let h = NodeHandle::new(key);
    if graph.contains_node(&h) {
        return Some(h);
    }
    graph.nodes_named(key).into_iter().next()
}

fn param<T: std::str::FromStr>(q: &HashMap<String, String>, key: &str, default: T) -> ApiResult<T> {
    match q.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| ApiError::bad_request(format!("query parameter {key}={v:?} is not a non-negative integer"))),
    }
}

pub async fn get_subgraph(
    State(state): State<AppState>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<crate::SubgraphView>> {
    let center = q
        .get("center")
        .ok_or_else(|| ApiError::bad_request("missing query parameter center"))?;
    let radius: usize = param(&q, "radius", 1)?;
    let limit: usize = param(&q, "limit", 200)?;
    let view = state.reader.current();
    let handle = resolve_node(&view.graph, center).ok_or_else(|| ApiError::not_found(format!("no node {center:?}")))?;
    let sg = subgraph(&view.graph, &handle, radius, limit.max(1))
        .ok_or_else(|| ApiError::not_found(format!("no node {center:?}")))?;
    Ok(Json(sg))
}

pub async fn get_stats(State(state): State<AppState>) -> Json<JsonValue> {
    let view = state.reader.current();
    let stats = view.graph.degree_stats_with(state.eval.exec);
    Json(json!({
        "seq": view.seq,
        "node_count": stats.node_count,
        "edge_count": stats.edge_count,
        "avg_degree": stats.avg_degree,
        "histogram": stats.histogram,
    }))
}

pub async fn get_node(State(state): State<AppState>, Path(key): Path<String>) -> ApiResult<Json<JsonValue>> {
    let view = state.reader.current();
    let g = &view.graph;
    let h = resolve_node(g, &key).ok_or_else(|| ApiError::not_found(format!("no node {key:?}")))?;
    let n = g.node(&h).ok_or_else(|| ApiError::not_found(format!("no node {key:?}")))?;
    let edges = |it: &mut dyn Iterator<Item = &brain_core::graph::TypedEdge>| -> Vec<JsonValue> {
        it.map(|e| Value::Edge(e.id.clone()).to_json(g)).collect()
    };
    Ok(Json(json!({
        "handle": h,
        "name": n.name,
        "type": n.node_type,
        "src": n.src,
        "media_ref": n.media_ref,
        "belief": n.belief.value(),
        "approvals": n.belief.approvals,
        "disapprovals": n.belief.disapprovals,
        "degree": g.degree(&h),
        "lineage": n.lineage,
        "out_edges": edges(&mut g.out_edges(&h)),
        "in_edges": edges(&mut g.in_edges(&h)),
    })))
}

pub async fn not_found() -> ApiError {
    ApiError::not_found("no such route")
}
