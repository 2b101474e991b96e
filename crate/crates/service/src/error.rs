use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use pprvari_core::deltagen::DeltaError;
use pprvari_core::engine::EngineError;
use pprvari_core::Diagnostic;
use serde::Serialize;

/// Error body shared by every endpoint.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub decisions: Vec<String>,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, error: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody { error, message: message.into(), diagnostics: Vec::new(), decisions: Vec::new() },
        }
    }

    pub fn not_found(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not-found", format!("no session {id}"))
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    fn with_diagnostics(mut self, ds: Vec<Diagnostic>) -> Self {
        self.body.diagnostics = ds;
        self
    }

    fn with_decisions(mut self, ds: Vec<String>) -> Self {
        self.body.decisions = ds;
        self
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        use EngineError::*;
        let msg = e.to_string();
        let conflict = |kind| ApiError::new(StatusCode::CONFLICT, kind, &msg);
        let invalid = |kind| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, kind, &msg);
        match e {
            Stage { .. } => conflict("stage"),
            Violations(ds) => conflict("violations").with_diagnostics(ds),
            UnknownDecision(d) => invalid("unknown-decision").with_decisions(vec![d]),
            Range { decision, .. } => invalid("range").with_decisions(vec![decision]),
            NotVisible(d) => conflict("not-visible").with_decisions(vec![d]),
            AlreadySet(d) => conflict("already-set").with_decisions(vec![d]),
            RuleViolation { decision, .. } => conflict("rule-violation").with_decisions(vec![decision]),
            RollbackTooLarge { .. } => conflict("rollback"),
            Pending(ds) => conflict("pending").with_decisions(ds),
            Contradiction(fs) => conflict("contradiction").with_decisions(fs),
            Inconsistent(ds) => invalid("inconsistent-workspace").with_diagnostics(ds),
            PermutationRange { .. } => invalid("range"),
            Replay(_) => invalid("replay"),
        }
    }
}

impl From<DeltaError> for ApiError {
    fn from(e: DeltaError) -> Self {
        let msg = e.to_string();
        match e {
            DeltaError::NotDone(_) => ApiError::new(StatusCode::CONFLICT, "stage", msg),
            DeltaError::Syntax(d) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "syntax", msg).with_diagnostics(vec![d])
            }
            DeltaError::Io(_) => ApiError::internal(msg),
            _ => ApiError::new(StatusCode::CONFLICT, "delta", msg),
        }
    }
}

impl From<serde_json::Error> for ApiError {
    fn from(e: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid-body", e.to_string()),
            _ => ApiError::new(StatusCode::BAD_REQUEST, "malformed-body", e.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
