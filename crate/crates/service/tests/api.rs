use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use chemvis_core::app::ChemVis;
use chemvis_core::config::ServiceConfig;
use chemvis_service::router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const BOUNDARY: &str = "chemvis-test-boundary";

fn config(dir: &Path) -> ServiceConfig {
    ServiceConfig {
        store_dir: dir.to_path_buf(),
        offline: true,
        ..ServiceConfig::default()
    }
}

fn app_with(config: ServiceConfig) -> Router {
    router(Arc::new(ChemVis::open(config).unwrap()))
}

fn multipart(fields: &[(&str, Option<&str>, &[u8])]) -> Vec<u8> {
    let mut body = Vec::new();
    for (name, filename, value) in fields {
        body.extend_from_slice(format!("--{BOUNDARY}\r\n").as_bytes());
        let disposition = match filename {
            Some(f) => format!("Content-Disposition: form-data; name=\"{name}\"; filename=\"{f}\"\r\n\r\n"),
            None => format!("Content-Disposition: form-data; name=\"{name}\"\r\n\r\n"),
        };
        body.extend_from_slice(disposition.as_bytes());
        body.extend_from_slice(value);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{BOUNDARY}--\r\n").as_bytes());
    body
}

struct Resp {
    status: StatusCode,
    content_type: String,
    body: Value,
}

async fn send(app: &Router, request: Request<Body>) -> Resp {
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let content_type = response
        .headers()
        .get(header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let body = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    Resp {
        status,
        content_type,
        body,
    }
}

async fn upload_raw(app: &Router, body: Vec<u8>) -> Resp {
    let request = Request::post("/api/documents")
        .header(
            header::CONTENT_TYPE,
            format!("multipart/form-data; boundary={BOUNDARY}"),
        )
        .body(Body::from(body))
        .unwrap();
    send(app, request).await
}

async fn upload(app: &Router, text: &str, format: &str, title: &str) -> String {
    let resp = upload_raw(
        app,
        multipart(&[
            ("file", Some("paper"), text.as_bytes()),
            ("format", None, format.as_bytes()),
            ("title", None, title.as_bytes()),
        ]),
    )
    .await;
    assert_eq!(resp.status, StatusCode::CREATED, "{}", resp.body);
    resp.body["id"].as_str().unwrap().to_string()
}

async fn get(app: &Router, uri: &str) -> Resp {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn post_json(app: &Router, uri: &str, value: Value) -> Resp {
    let request = Request::post(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(value.to_string()))
        .unwrap();
    send(app, request).await
}

fn assert_error(resp: &Resp, status: u16, kind: &str) {
    assert_eq!(resp.status.as_u16(), status, "{}", resp.body);
    assert_eq!(resp.body["code"], status);
    assert_eq!(resp.body["error"], kind);
    assert!(resp.body["detail"].is_string());
    assert_eq!(resp.content_type, "application/json");
}

const FIG_INPUT: &str = "Sodium carbonate reacts with magnesium sulphate in water.";
const FIG_CANDIDATE: &str = "Na2CO3 and MgSO4 were dissolved in CH4O.";

#[tokio::test]
async fn xml_upload_returns_created_id() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(config(dir.path()));
    let xml = b"<article><title>Salts</title><p>Na2CO3 in H2O.</p></article>";
    let resp = upload_raw(&app, multipart(&[("file", Some("a.xml"), xml)])).await;
    assert_eq!(resp.status, StatusCode::CREATED);
    assert_eq!(resp.body, json!({"id": "doc-000001"}));
    assert_eq!(resp.content_type, "application/json");
}

#[tokio::test]
async fn upload_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.max_upload_bytes = 100;
    let app = app_with(cfg);
    let empty = upload_raw(&app, multipart(&[("file", Some("a.txt"), b"")])).await;
    assert_error(&empty, 400, "EmptyDocument");
    let missing = upload_raw(&app, multipart(&[("title", None, b"t")])).await;
    assert_error(&missing, 400, "BadRequest");
    let pdf = upload_raw(&app, multipart(&[("file", None, b"x"), ("format", None, b"pdf")])).await;
    assert_error(&pdf, 400, "UnsupportedFormat");
    let broken = upload_raw(&app, multipart(&[("file", Some("a.xml"), b"<p>open")])).await;
    assert_error(&broken, 400, "MalformedDocument");
    let big = upload_raw(&app, multipart(&[("file", None, &[b'a'; 150])])).await;
    assert_error(&big, 413, "PayloadTooLarge");
    let huge = upload_raw(&app, multipart(&[("file", None, &vec![b'a'; 200 * 1024])])).await;
    assert_error(&huge, 413, "PayloadTooLarge");
    let not_multipart = post_json(&app, "/api/documents", json!({})).await;
    assert_eq!(not_multipart.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn entities_listing() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(config(dir.path()));
    let id = upload(&app, FIG_INPUT, "plaintext", "input").await;
    let resp = get(&app, &format!("/api/documents/{id}/entities")).await;
    assert_eq!(resp.status, StatusCode::OK);
    let rows = resp.body.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let soda = &rows[0];
    assert_eq!(soda["cid"], 10340);
    assert_eq!(soda["weight"], 105.988);
    assert_eq!(soda["formula"], "CNa2O3");
    assert_eq!(soda["display_name"], "Sodium carbonate");
    assert_eq!(soda["frequency"], 1);
    assert_eq!(soda["status"], "resolved");
    assert!(soda.as_object().unwrap().contains_key("structure_image"));

    let bare = upload(&app, "Nothing chemical here at all.", "plaintext", "").await;
    let resp = get(&app, &format!("/api/documents/{bare}/entities")).await;
    assert_eq!(resp.body, json!([]));

    assert_error(&get(&app, "/api/documents/doc-000099/entities").await, 404, "UnknownDocument");
    assert_error(&get(&app, "/api/documents/nope/entities").await, 400, "BadRequest");
}

#[tokio::test]
async fn recommendations_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(config(dir.path()));
    let a = upload(&app, FIG_INPUT, "plaintext", "input").await;
    let b = upload(&app, FIG_CANDIDATE, "plaintext", "candidate").await;
    upload(&app, "Benzene and toluene distillation.", "plaintext", "other").await;
    let resp = get(&app, &format!("/api/documents/{a}/recommendations?k=5")).await;
    assert_eq!(resp.status, StatusCode::OK);
    let rows = resp.body.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["candidate"], b.as_str());
    assert_eq!(rows[0]["title"], "candidate");
    for key in ["score", "entity_component", "text_component"] {
        assert!(rows[0][key].is_number());
    }
    let k0 = get(&app, &format!("/api/documents/{a}/recommendations?k=0")).await;
    assert_eq!(k0.body, json!([]));
    let entity_only = get(&app, &format!("/api/documents/{a}/recommendations?w_entity=1&w_text=0")).await;
    let top = &entity_only.body[0];
    let (score, entity) = (top["score"].as_f64().unwrap(), top["entity_component"].as_f64().unwrap());
    assert!((score - entity).abs() < 1e-12, "{score} vs {entity}");
    let scaled = get(&app, &format!("/api/documents/{a}/recommendations?w_entity=2&w_text=2")).await;
    assert_eq!(scaled.body, get(&app, &format!("/api/documents/{a}/recommendations")).await.body);

    let zero = get(&app, &format!("/api/documents/{a}/recommendations?w_entity=0&w_text=0")).await;
    assert_error(&zero, 422, "InvalidWeights");
    let negative = get(&app, &format!("/api/documents/{a}/recommendations?w_entity=-1")).await;
    assert_error(&negative, 422, "InvalidWeights");
    let garbage = get(&app, &format!("/api/documents/{a}/recommendations?k=many")).await;
    assert_error(&garbage, 400, "BadRequest");
    let unknown = get(&app, "/api/documents/doc-000042/recommendations?w_entity=0&w_text=0").await;
    assert_error(&unknown, 404, "UnknownDocument");
}

#[tokio::test]
async fn compare_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(config(dir.path()));
    let a = upload(&app, FIG_INPUT, "plaintext", "input").await;
    let b = upload(&app, FIG_CANDIDATE, "plaintext", "candidate").await;
    let resp = get(&app, &format!("/api/compare?input={a}&candidate={b}")).await;
    assert_eq!(resp.status, StatusCode::OK);
    assert_eq!(resp.body["input"], a.as_str());
    assert!((resp.body["entity_similarity"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-9);
    let rows = resp.body["rows"].as_array().unwrap();
    let summary: Vec<(u64, bool, u64)> = rows
        .iter()
        .map(|r| {
            (
                r["entity"]["cid"].as_u64().unwrap(),
                r["matched"].as_bool().unwrap(),
                r["shade"].as_u64().unwrap(),
            )
        })
        .collect();
    assert_eq!(
        summary,
        vec![(24083, true, 1), (10340, true, 1), (962, false, 0), (887, false, 0)]
    );
    let own = get(&app, &format!("/api/compare?input={a}&candidate={a}")).await;
    assert!(own.body["rows"].as_array().unwrap().iter().all(|r| r["matched"] == true));
    let unknown = get(&app, &format!("/api/compare?input={a}&candidate=doc-000077")).await;
    assert_error(&unknown, 404, "UnknownDocument");
    assert_error(&get(&app, &format!("/api/compare?input={a}")).await, 400, "BadRequest");
}

#[tokio::test]
async fn bookmarks_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = {
        let app = app_with(config(dir.path()));
        let a = upload(&app, FIG_INPUT, "plaintext", "input").await;
        let b = upload(&app, FIG_CANDIDATE, "plaintext", "candidate").await;
        let c = upload(&app, "Water, water everywhere.", "plaintext", "c").await;
        let first = post_json(&app, "/api/bookmarks", json!({"input": a, "candidate": c})).await;
        assert_eq!(first.status, StatusCode::OK);
        post_json(&app, "/api/bookmarks", json!({"input": a, "candidate": b})).await;
        let again = post_json(&app, "/api/bookmarks", json!({"input": a, "candidate": c})).await;
        assert_eq!(again.body, first.body);
        let empty = get(&app, &format!("/api/bookmarks?input={b}")).await;
        assert_eq!(empty.body, json!([]));
        let unknown = post_json(&app, "/api/bookmarks", json!({"input": a, "candidate": "doc-000050"})).await;
        assert_error(&unknown, 404, "UnknownDocument");
        let malformed = post_json(&app, "/api/bookmarks", json!({"input": a})).await;
        assert_error(&malformed, 400, "BadRequest");
        (a, b, c)
    };
    let app = app_with(config(dir.path()));
    let listed = get(&app, &format!("/api/bookmarks?input={a}")).await;
    let candidates: Vec<&str> = listed
        .body
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["candidate"].as_str().unwrap())
        .collect();
    assert_eq!(candidates, vec![c.as_str(), b.as_str()]);
    let entities = get(&app, &format!("/api/documents/{b}/entities")).await;
    assert_eq!(entities.body.as_array().unwrap().len(), 3);
    assert_error(&get(&app, "/api/bookmarks?input=doc-000009").await, 404, "UnknownDocument");
}

#[tokio::test]
async fn unknown_routes_use_the_error_body() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(config(dir.path()));
    assert_error(&get(&app, "/api/nothing").await, 404, "NotFound");
}
