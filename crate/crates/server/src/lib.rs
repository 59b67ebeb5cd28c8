//! HTTP API over a knowledge engine data directory.
//!
//! | method | path | body / query |
//! |---|---|---|
//! | POST | `/api/feeds` | feed JSON Lines |
//! | POST | `/api/query` | `{program, max_results?}` |
//! | POST | `/api/feedback` | `{target, verdict, user?}` |
//! | POST | `/api/graph-ops` | `{action, ..., proposer?}` |
//! | GET | `/api/subgraph` | `center, radius, limit` |
//! | GET | `/api/stats` | |
//! | GET | `/api/nodes/{handle}` | |
//!
//! The user for feedback and graph edits may also be sent as an `x-user`
//! header. Errors are `{code, message}` JSON.

mod error;
mod routes;
mod subgraph;

use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::routing::{get, post};
use axum::Router;
use brain_core::engine::{Engine, Reader};
use brain_core::eval::{EvalOptions, PluginRegistry};
use tower_http::services::ServeDir;

pub use error::ApiError;
pub use subgraph::{subgraph, SubgraphView};

pub const USER_HEADER: &str = "x-user";
pub const DEFAULT_MAX_RESULTS: usize = 1000;

#[derive(Clone)]
pub struct AppState {
    writer: Arc<Mutex<Engine>>,
    reader: Reader,
    plugins: Arc<PluginRegistry>,
    eval: EvalOptions,
}

impl AppState {
    pub fn new(engine: Engine) -> Self {
        let plugins = engine.config().plugin_registry();
        let eval = EvalOptions {
            max_path_len: engine.config().inference.max_path_len,
            exec: engine.exec(),
            ..EvalOptions::default()
        };
        Self {
            reader: engine.reader(),
            writer: Arc::new(Mutex::new(engine)),
            plugins: Arc::new(plugins),
            eval,
        }
    }

    pub fn with_plugins(mut self, plugins: PluginRegistry) -> Self {
        self.plugins = Arc::new(plugins);
        self
    }

    pub fn reader(&self) -> &Reader {
        &self.reader
    }

    /// Runs `f` with exclusive access to the engine on the blocking pool.
    async fn write<T, F>(&self, f: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&mut Engine) -> Result<T, ApiError> + Send + 'static,
    {
        let writer = self.writer.clone();
        tokio::task::spawn_blocking(move || {
            let mut engine = writer.lock().unwrap_or_else(|e| e.into_inner());
            f(&mut engine)
        })
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
    }
}

const INDEX_HTML: &str = include_str!("index.html");

/// The API plus the curator UI: files from `ui_dir` if given, otherwise a
/// built-in landing page at `/`.
pub fn router(state: AppState, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/feeds", post(routes::post_feed))
        .route("/api/query", post(routes::post_query))
        .route("/api/feedback", post(routes::post_feedback))
        .route("/api/graph-ops", post(routes::post_graph_op))
        .route("/api/subgraph", get(routes::get_subgraph))
        .route("/api/stats", get(routes::get_stats))
        .route("/api/nodes/{handle}", get(routes::get_node))
        .with_state(state);
    match ui_dir {
        Some(dir) if dir.is_dir() => api.fallback_service(ServeDir::new(dir)),
        _ => api
            .route("/", get(|| async { axum::response::Html(INDEX_HTML) }))
            .fallback(routes::not_found),
    }
}
