use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown session '{0}'")]
    UnknownSession(String),
    #[error("unknown strategy '{0}'")]
    UnknownStrategy(String),
    #[error("{0}")]
    Conflict(String),
    #[error("response arrived {elapsed_ms} ms after feedback, minimum is {min_wait_ms} ms")]
    TooFast { elapsed_ms: u64, min_wait_ms: u64 },
    #[error("choice {choice} is not a class index below {classes}")]
    InvalidChoice { choice: usize, classes: usize },
    #[error("session is not finished")]
    NotFinished,
    #[error("asset not found")]
    AssetNotFound,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("corrupt session log {path}: {reason}")]
    Log { path: String, reason: String },
    #[error(transparent)]
    Core(#[from] vistutor_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ServiceError>;

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "unknown-session",
            ServiceError::UnknownStrategy(_) => "unknown-strategy",
            ServiceError::Conflict(_) => "conflict",
            ServiceError::TooFast { .. } => "too-fast",
            ServiceError::InvalidChoice { .. } => "invalid-choice",
            ServiceError::NotFinished => "not-finished",
            ServiceError::AssetNotFound => "not-found",
            ServiceError::Config(_) => "config",
            ServiceError::Log { .. } => "log",
            ServiceError::Core(_) => "data",
            ServiceError::Io(_) => "io",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownSession(_) | ServiceError::AssetNotFound => StatusCode::NOT_FOUND,
            ServiceError::UnknownStrategy(_) | ServiceError::InvalidChoice { .. } => {
                StatusCode::BAD_REQUEST
            }
            ServiceError::Conflict(_) | ServiceError::NotFinished => StatusCode::CONFLICT,
            ServiceError::TooFast { .. } => StatusCode::TOO_MANY_REQUESTS,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = Json(json!({ "error": self.code(), "message": self.to_string() }));
        (self.status(), body).into_response()
    }
}
