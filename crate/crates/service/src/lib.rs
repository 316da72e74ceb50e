//! HTTP render service.
//!
//! `POST /render` turns a posted data-source document into the same SVG
//! bytes the CLI writes; `POST /layout` returns the scene as layout JSON;
//! `GET /healthz` reports status and versions.
//!
//! Request bodies are health data: they are never written to disk and never
//! logged. Every response depends only on its request.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hfigures::pipeline::{layout_document, parse_snapshot_list, render_document};
use hfigures::{
    LayoutConfig, LayoutError, RenderError, RenderOptions, ShowLabels, SnapshotSelection,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_MAX_BODY: usize = 5 * 1024 * 1024;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub max_body_bytes: usize,
    pub layout: LayoutConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            max_body_bytes: DEFAULT_MAX_BODY,
            layout: LayoutConfig::default(),
        }
    }
}

pub fn router(config: ServiceConfig) -> Router {
    let limit = config.max_body_bytes;
    Router::new()
        .route("/render", post(render))
        .route("/layout", post(layout))
        .route("/healthz", get(healthz))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(Arc::new(config))
}

pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(config)).await
}

/// Query parameters shared by `/render` and `/layout`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderQuery {
    pub snapshots: Option<String>,
    pub latest: Option<usize>,
    pub size: Option<f64>,
    pub labels: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub path: Option<String>,
    pub message: String,
    pub kind: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Health {
    pub status: &'static str,
    pub version: &'static str,
    pub layout_version: u32,
}

async fn healthz() -> Json<Health> {
    Json(Health {
        status: "ok",
        version: VERSION,
        layout_version: hfigures::LAYOUT_VERSION,
    })
}

fn error(
    status: StatusCode,
    kind: &'static str,
    path: Option<String>,
    message: String,
) -> Response {
    (
        status,
        Json(ErrorBody {
            path,
            message,
            kind,
        }),
    )
        .into_response()
}

#[allow(clippy::result_large_err)]
fn options(query: RenderQuery, base: &LayoutConfig) -> Result<RenderOptions, Response> {
    let bad = |path: &str, message: String| {
        error(
            StatusCode::BAD_REQUEST,
            "QueryError",
            Some(path.to_owned()),
            message,
        )
    };
    let snapshots = match (query.snapshots, query.latest) {
        (Some(_), Some(_)) => {
            return Err(bad(
                "query.snapshots",
                "use either snapshots or latest, not both".into(),
            ))
        }
        (Some(list), None) => SnapshotSelection::Explicit(
            parse_snapshot_list(&list).map_err(|m| bad("query.snapshots", m))?,
        ),
        (None, Some(n)) => SnapshotSelection::Latest(n),
        (None, None) => SnapshotSelection::default(),
    };
    let labels = match query.labels.as_deref() {
        None => None,
        Some("all") => Some(ShowLabels::All),
        Some("none") => Some(ShowLabels::None),
        Some(other) => {
            return Err(bad(
                "query.labels",
                format!("expected all or none, got {other:?}"),
            ))
        }
    };
    if let Some(size) = query.size {
        if !(size.is_finite() && size > 0.0) {
            return Err(bad("query.size", "size must be a positive number".into()));
        }
    }
    Ok(RenderOptions {
        snapshots,
        size: query.size,
        labels,
        config: base.clone(),
        ..Default::default()
    })
}

fn render_error(e: RenderError) -> Response {
    match e {
        RenderError::Dataset(d) => error(
            StatusCode::BAD_REQUEST,
            d.kind(),
            d.path().map(str::to_owned),
            d.to_string(),
        ),
        RenderError::Snapshot(s) => error(
            StatusCode::BAD_REQUEST,
            "SnapshotError",
            Some("query.snapshots".into()),
            s.to_string(),
        ),
        RenderError::Layout(l @ LayoutError::Overflow { .. }) => error(
            StatusCode::UNPROCESSABLE_ENTITY,
            "LayoutOverflow",
            None,
            l.to_string(),
        ),
        RenderError::Layout(l) => {
            error(StatusCode::BAD_REQUEST, "ConfigError", None, l.to_string())
        }
    }
}

/// Validates the request envelope and hands back the body text and options.
#[allow(clippy::result_large_err)]
fn prepare(
    state: &ServiceConfig,
    query: Result<Query<RenderQuery>, QueryRejection>,
    body: Result<Bytes, BytesRejection>,
) -> Result<(String, RenderOptions), Response> {
    let body = body.map_err(|rejection| {
        let status = rejection.status();
        let kind = if status == StatusCode::PAYLOAD_TOO_LARGE {
            "PayloadTooLarge"
        } else {
            "BodyError"
        };
        let message = if status == StatusCode::PAYLOAD_TOO_LARGE {
            format!("request body exceeds {} bytes", state.max_body_bytes)
        } else {
            rejection.body_text()
        };
        error(status, kind, None, message)
    })?;
    let Query(query) =
        query.map_err(|r| error(StatusCode::BAD_REQUEST, "QueryError", None, r.body_text()))?;
    let options = options(query, &state.layout)?;
    let text = String::from_utf8(body.to_vec()).map_err(|_| {
        error(
            StatusCode::BAD_REQUEST,
            "SyntaxError",
            Some("$".into()),
            "body is not valid UTF-8".into(),
        )
    })?;
    Ok((text, options))
}

pub fn content_hash(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

async fn render(
    State(state): State<Arc<ServiceConfig>>,
    headers: HeaderMap,
    query: Result<Query<RenderQuery>, QueryRejection>,
    body: Result<Bytes, BytesRejection>,
) -> Response {
    let (text, options) = match prepare(&state, query, body) {
        Ok(x) => x,
        Err(resp) => return resp,
    };
    let doc = match render_document(&text, &options) {
        Ok(doc) => doc,
        Err(e) => return render_error(e),
    };
    let etag = format!("\"{}\"", content_hash(doc.text.as_bytes()));
    let etag_value = HeaderValue::from_str(&etag).expect("hex etag is a valid header");
    if headers
        .get(header::IF_NONE_MATCH)
        .is_some_and(|v| v.as_bytes() == etag.as_bytes())
    {
        return (StatusCode::NOT_MODIFIED, [(header::ETAG, etag_value)]).into_response();
    }
    (
        StatusCode::OK,
        [
            (
                header::CONTENT_TYPE,
                HeaderValue::from_static("image/svg+xml"),
            ),
            (header::ETAG, etag_value),
        ],
        doc.text,
    )
        .into_response()
}

async fn layout(
    State(state): State<Arc<ServiceConfig>>,
    query: Result<Query<RenderQuery>, QueryRejection>,
    body: Result<Bytes, BytesRejection>,
) -> Response {
    let (text, options) = match prepare(&state, query, body) {
        Ok(x) => x,
        Err(resp) => return resp,
    };
    match layout_document(&text, &options) {
        Ok(scene) => (
            StatusCode::OK,
            [(
                header::CONTENT_TYPE,
                HeaderValue::from_static("application/json"),
            )],
            scene.to_layout_json(),
        )
            .into_response(),
        Err(e) => render_error(e),
    }
}
