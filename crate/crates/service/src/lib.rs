//! HTTP JSON API over [`ChemVis`].
//!
//! | method | path                                   | success            |
//! |--------|----------------------------------------|--------------------|
//! | POST   | `/api/documents` (multipart)           | 201 `{id}`         |
//! | GET    | `/api/documents/{id}/entities`         | 200 entity rows    |
//! | GET    | `/api/documents/{id}/recommendations`  | 200 ranked rows    |
//! | GET    | `/api/compare?input=&candidate=`       | 200 alignment      |
//! | POST   | `/api/bookmarks` `{input, candidate}`  | 200 bookmark       |
//! | GET    | `/api/bookmarks?input=`                | 200 bookmark list  |
//!
//! Every error body is `{error, code, detail}`.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::multipart::MultipartError;
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use chemvis_core::api::{to_json_body, ApiError, BookmarkRequest, ErrorBody};
use chemvis_core::app::{parse_doc_id, ChemVis, DEFAULT_K};
use chemvis_core::config::ServiceConfig;
use serde::Serialize;

/// Headroom above the upload cap for multipart framing and the text fields.
const MULTIPART_OVERHEAD: usize = 64 * 1024;

type AppState = Arc<ChemVis>;

struct Failure(ApiError);

impl From<ApiError> for Failure {
    fn from(e: ApiError) -> Self {
        Failure(e)
    }
}

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error_response(body: &ErrorBody) -> Response {
    let status = StatusCode::from_u16(body.code).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    json(status, to_json_body(body))
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        if !self.0.is_input_error() {
            log::error!("{}", self.0);
        }
        error_response(&self.0.body())
    }
}

type Reply = Result<Response, Failure>;

/// Run blocking store and resolver work off the async executor.
async fn blocking<T, F>(app: &AppState, work: F) -> Result<T, Failure>
where
    T: Send + 'static,
    F: FnOnce(&ChemVis) -> Result<T, ApiError> + Send + 'static,
{
    let app = app.clone();
    tokio::task::spawn_blocking(move || work(&app))
        .await
        .map_err(|e| Failure(ApiError::Internal(format!("worker failed: {e}"))))?
        .map_err(Failure)
}

fn ok<T: Serialize>(status: StatusCode, value: &T) -> Reply {
    Ok(json(status, to_json_body(value)))
}

fn query_param<'a>(query: &'a HashMap<String, String>, name: &str) -> Result<&'a str, Failure> {
    query
        .get(name)
        .map(String::as_str)
        .ok_or_else(|| Failure(ApiError::BadRequest(format!("missing query parameter `{name}`"))))
}

fn optional_number<T: std::str::FromStr>(
    query: &HashMap<String, String>,
    name: &str,
) -> Result<Option<T>, Failure> {
    match query.get(name).map(|v| v.trim()).filter(|v| !v.is_empty()) {
        None => Ok(None),
        Some(v) => v.parse().map(Some).map_err(|_| {
            Failure(ApiError::BadRequest(format!("`{name}` must be a number, got `{v}`")))
        }),
    }
}

fn multipart_failure(e: MultipartError, limit: usize) -> Failure {
    if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
        Failure(ApiError::PayloadTooLarge {
            size: limit + 1,
            limit,
        })
    } else {
        Failure(ApiError::BadRequest(format!("multipart body: {}", e.body_text())))
    }
}

fn format_from_filename(name: Option<&str>) -> &'static str {
    match name {
        Some(n) if n.to_ascii_lowercase().ends_with(".xml") => "xml",
        _ => "plaintext",
    }
}

async fn upload(State(app): State<AppState>, mut form: Multipart) -> Reply {
    let limit = app.config().max_upload_bytes;
    let mut file: Option<(Bytes, Option<String>)> = None;
    let mut format = None;
    let mut title = None;
    while let Some(field) = form.next_field().await.map_err(|e| multipart_failure(e, limit))? {
        let name = field.name().unwrap_or_default().to_string();
        match name.as_str() {
            "file" => {
                let filename = field.file_name().map(str::to_string);
                let bytes = field.bytes().await.map_err(|e| multipart_failure(e, limit))?;
                file = Some((bytes, filename));
            }
            "format" => format = Some(field.text().await.map_err(|e| multipart_failure(e, limit))?),
            "title" => title = Some(field.text().await.map_err(|e| multipart_failure(e, limit))?),
            other => log::debug!("ignoring multipart field `{other}`"),
        }
    }
    let Some((bytes, filename)) = file else {
        return Err(ApiError::BadRequest("missing multipart field `file`".into()).into());
    };
    let format = format
        .filter(|f| !f.trim().is_empty())
        .unwrap_or_else(|| format_from_filename(filename.as_deref()).to_string());
    let created = blocking(&app, move |app| app.ingest(&bytes, &format, title.as_deref())).await?;
    ok(StatusCode::CREATED, &created)
}

async fn entities(State(app): State<AppState>, Path(id): Path<String>) -> Reply {
    let id = parse_doc_id(&id)?;
    let rows = blocking(&app, move |app| app.entities(id)).await?;
    ok(StatusCode::OK, &rows)
}

async fn recommendations(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> Reply {
    let id = parse_doc_id(&id)?;
    let k = optional_number::<usize>(&query, "k")?.unwrap_or(DEFAULT_K);
    let w_entity = optional_number::<f64>(&query, "w_entity")?;
    let w_text = optional_number::<f64>(&query, "w_text")?;
    let rows = blocking(&app, move |app| {
        // unknown ids are 404 even when the weights are also bad
        app.entities(id)?;
        let weights = app.weights(w_entity, w_text)?;
        app.recommend(id, k, weights)
    })
    .await?;
    ok(StatusCode::OK, &rows)
}

async fn compare(State(app): State<AppState>, Query(query): Query<HashMap<String, String>>) -> Reply {
    let input = parse_doc_id(query_param(&query, "input")?)?;
    let candidate = parse_doc_id(query_param(&query, "candidate")?)?;
    let body = blocking(&app, move |app| app.compare(input, candidate)).await?;
    ok(StatusCode::OK, &body)
}

async fn add_bookmark(State(app): State<AppState>, body: Bytes) -> Reply {
    let request: BookmarkRequest = serde_json::from_slice(&body)
        .map_err(|e| Failure(ApiError::BadRequest(format!("bookmark body: {e}"))))?;
    let bookmark =
        blocking(&app, move |app| app.add_bookmark(request.input, request.candidate)).await?;
    ok(StatusCode::OK, &bookmark)
}

async fn list_bookmarks(
    State(app): State<AppState>,
    Query(query): Query<HashMap<String, String>>,
) -> Reply {
    let input = parse_doc_id(query_param(&query, "input")?)?;
    let list = blocking(&app, move |app| app.bookmarks(input)).await?;
    ok(StatusCode::OK, &list)
}

async fn not_found() -> Response {
    error_response(&ErrorBody {
        error: "NotFound".into(),
        code: 404,
        detail: "no such route".into(),
    })
}

pub fn router(app: Arc<ChemVis>) -> Router {
    let body_limit = app.config().max_upload_bytes.saturating_add(MULTIPART_OVERHEAD);
    Router::new()
        .route("/api/documents", post(upload))
        .route("/api/documents/:id/entities", get(entities))
        .route("/api/documents/:id/recommendations", get(recommendations))
        .route("/api/compare", get(compare))
        .route("/api/bookmarks", post(add_bookmark).get(list_bookmarks))
        .fallback(not_found)
        .layer(DefaultBodyLimit::max(body_limit))
        .with_state(app)
}

/// Open the application described by `config` and serve until the process
/// is stopped.
pub async fn serve(config: ServiceConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let listen = config.listen.clone();
    let app = tokio::task::spawn_blocking(move || ChemVis::open(config)).await??;
    let listener = tokio::net::TcpListener::bind(&listen).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(app))).await?;
    Ok(())
}
