use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use brain_core::engine::EngineError;
use brain_core::eval::EvalError;
use brain_core::feedback::FeedbackError;
use brain_core::ingest::IngestError;
use brain_core::rql::SyntaxError;
use serde_json::{json, Value as JsonValue};

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub extra: Option<JsonValue>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            extra: None,
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    fn with(mut self, extra: JsonValue) -> Self {
        self.extra = Some(extra);
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "code": self.code, "message": self.message });
        if let (Some(JsonValue::Object(extra)), JsonValue::Object(b)) = (self.extra, &mut body) {
            b.extend(extra);
        }
        (self.status, Json(body)).into_response()
    }
}

impl From<SyntaxError> for ApiError {
    fn from(e: SyntaxError) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "syntax_error", e.to_string()).with(json!({
            "position": { "line": e.line, "column": e.column },
            "expected": e.expected,
        }))
    }
}

impl From<EvalError> for ApiError {
    fn from(e: EvalError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "eval_error", e.to_string())
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let msg = e.to_string();
        match e {
            EngineError::Ingest(IngestError::UnknownEdgeTypes(types)) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "unregistered_edge_type", msg)
                    .with(json!({ "edge_types": types }))
            }
            EngineError::Ingest(IngestError::Malformed { line, .. }) => {
                ApiError::new(StatusCode::BAD_REQUEST, "malformed_feed", msg).with(json!({ "line": line }))
            }
            EngineError::Ingest(IngestError::Empty) => ApiError::new(StatusCode::BAD_REQUEST, "malformed_feed", msg),
            EngineError::Ingest(e) if e.is_user_error() => ApiError::bad_request(msg),
            EngineError::Graph(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_graph_op", msg),
            EngineError::Feedback(FeedbackError::NotFound(_)) => ApiError::not_found(msg),
            EngineError::Feedback(FeedbackError::NoUser) => ApiError::bad_request(msg),
            _ => {
                tracing::error!(error = %msg, "engine failure");
                ApiError::internal(msg)
            }
        }
    }
}
