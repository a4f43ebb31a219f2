use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use qgraph_core::io::{FormatError, LibraryError};
use qgraph_core::{Error as EngineError, ValidationReport};

#[derive(Debug, Serialize)]
pub struct ViolationBody {
    pub kind: &'static str,
    pub message: String,
}

/// JSON error body: `{"error": message, "kind": category, "violations": [...]}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub kind: &'static str,
    pub message: String,
    pub violations: Vec<ViolationBody>,
}

impl ApiError {
    pub fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, kind, message: message.into(), violations: Vec::new() }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::CONFLICT, "conflict", message)
    }

    /// Logs the detail and returns a generic message.
    pub fn internal(detail: impl std::fmt::Display) -> Self {
        eprintln!("qgraph-service: internal error: {detail}");
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", "internal error")
    }

    pub fn invalid_graph(report: &ValidationReport) -> Self {
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            kind: "validation",
            message: format!("graph failed validation with {} violation(s)", report.violations.len()),
            violations: report
                .violations
                .iter()
                .map(|v| ViolationBody { kind: v.kind(), message: v.to_string() })
                .collect(),
        }
    }
}

impl From<FormatError> for ApiError {
    fn from(e: FormatError) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "parse", e.to_string())
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::InvalidGraph(report) => ApiError::invalid_graph(&report),
            other => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "engine", other.to_string()),
        }
    }
}

impl From<LibraryError> for ApiError {
    fn from(e: LibraryError) -> Self {
        match e {
            LibraryError::NotFound(name) => ApiError::not_found(format!("graph {name:?} not found")),
            LibraryError::InvalidName(_) => ApiError::bad_request(e.to_string()),
            LibraryError::Format { source, .. } => ApiError::internal(format!("stored document is corrupt: {source}")),
            LibraryError::Io { .. } => ApiError::internal(e),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        #[derive(Serialize)]
        struct Body<'a> {
            error: &'a str,
            kind: &'a str,
            #[serde(skip_serializing_if = "<[_]>::is_empty")]
            violations: &'a [ViolationBody],
        }
        let body = Body { error: &self.message, kind: self.kind, violations: &self.violations };
        (self.status, Json(body)).into_response()
    }
}
