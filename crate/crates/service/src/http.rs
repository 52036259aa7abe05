use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;

use crate::error::{Result, ServiceError};
use crate::manager::{CreateRequest, SessionManager};

#[derive(Debug, Deserialize)]
pub struct RespondRequest {
    pub index: usize,
    pub choice: usize,
}

type Shared = Arc<SessionManager>;

pub fn router(manager: Shared) -> Router {
    Router::new()
        .route("/api/sessions", post(create))
        .route("/api/sessions/{id}/next", get(next))
        .route("/api/sessions/{id}/respond", post(respond))
        .route("/api/sessions/{id}/result", get(result))
        .route("/assets/{*path}", get(asset))
        .with_state(manager)
}

pub async fn serve(manager: Shared, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(manager)).await
}

async fn create(
    State(m): State<Shared>,
    Json(req): Json<CreateRequest>,
) -> Result<impl IntoResponse> {
    Ok((StatusCode::CREATED, Json(m.create(&req)?)))
}

async fn next(State(m): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<impl IntoResponse> {
    Ok(Json(m.next(&id)?))
}

async fn respond(
    State(m): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<RespondRequest>,
) -> Result<impl IntoResponse> {
    Ok(Json(m.respond(&id, req.index, req.choice)?))
}

async fn result(
    State(m): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> Result<impl IntoResponse> {
    Ok(Json(m.result(&id)?))
}

/// Joins `requested` under `root`, refusing anything but plain components.
pub fn sanitize_asset_path(root: &Path, requested: &str) -> Option<PathBuf> {
    if requested.is_empty() || requested.contains('\\') {
        return None;
    }
    let rel = Path::new(requested);
    if !rel.components().all(|c| matches!(c, Component::Normal(_))) {
        return None;
    }
    Some(root.join(rel))
}

fn content_type(path: &Path) -> &'static str {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("gif") => "image/gif",
        Some("webp") => "image/webp",
        Some("svg") => "image/svg+xml",
        Some("json") => "application/json",
        _ => "application/octet-stream",
    }
}

async fn asset(
    State(m): State<Shared>,
    UrlPath(path): UrlPath<String>,
) -> Result<impl IntoResponse> {
    let root = m
        .config()
        .assets_dir
        .as_ref()
        .ok_or(ServiceError::AssetNotFound)?;
    let full = sanitize_asset_path(root, &path).ok_or(ServiceError::AssetNotFound)?;
    let bytes = tokio::fs::read(&full)
        .await
        .map_err(|_| ServiceError::AssetNotFound)?;
    Ok(([(header::CONTENT_TYPE, content_type(&full))], bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asset_paths_are_confined() {
        let root = Path::new("/srv/assets");
        assert_eq!(
            sanitize_asset_path(root, "img/a.png"),
            Some(PathBuf::from("/srv/assets/img/a.png"))
        );
        for bad in [
            "../etc/passwd",
            "img/../../x",
            "/etc/passwd",
            "",
            "a\\..\\b",
            "./a",
        ] {
            assert_eq!(sanitize_asset_path(root, bad), None, "{bad}");
        }
    }
}
