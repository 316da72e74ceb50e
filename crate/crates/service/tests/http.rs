use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use hfigures::pipeline::render_document;
use hfigures::samples::{BLOOD_PRESSURE, MODELED_PATIENT};
use hfigures::{RenderOptions, SnapshotSelection};
use hfigures_service::{content_hash, router, ServiceConfig};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

async fn call(app: Router, req: Request<Body>) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
    let resp = app.oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = resp
        .into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec();
    (status, headers, body)
}

fn post(uri: &str, body: impl Into<Body>) -> Request<Body> {
    Request::post(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(body.into())
        .unwrap()
}

fn json(body: &[u8]) -> Value {
    serde_json::from_slice(body).unwrap()
}

#[tokio::test]
async fn healthz_reports_versions() {
    let (status, _, body) = call(
        router(ServiceConfig::default()),
        Request::get("/healthz").body(Body::empty()).unwrap(),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let v = json(&body);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["layout_version"], hfigures::LAYOUT_VERSION);
}

#[tokio::test]
async fn render_matches_library_bytes() {
    let uri = "/render?snapshots=1420798224,1423742720";
    let (status, headers, body) =
        call(router(ServiceConfig::default()), post(uri, MODELED_PATIENT)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(headers[header::CONTENT_TYPE], "image/svg+xml");
    let opts = RenderOptions {
        snapshots: SnapshotSelection::Explicit(vec![1_420_798_224, 1_423_742_720]),
        ..Default::default()
    };
    let expected = render_document(MODELED_PATIENT, &opts).unwrap().text;
    assert_eq!(String::from_utf8(body).unwrap(), expected);
    assert_eq!(
        headers[header::ETAG].to_str().unwrap(),
        format!("\"{}\"", content_hash(expected.as_bytes()))
    );
}

#[tokio::test]
async fn etag_revalidation_returns_304() {
    let app = router(ServiceConfig::default());
    let (_, headers, _) = call(app.clone(), post("/render", BLOOD_PRESSURE)).await;
    let etag = headers[header::ETAG].clone();
    let req = Request::post("/render")
        .header(header::IF_NONE_MATCH, etag)
        .body(Body::from(BLOOD_PRESSURE))
        .unwrap();
    let (status, _, body) = call(app, req).await;
    assert_eq!(status, StatusCode::NOT_MODIFIED);
    assert!(body.is_empty());
}

#[tokio::test]
async fn layout_json_is_versioned() {
    let (status, headers, body) = call(
        router(ServiceConfig::default()),
        post("/layout?latest=1&labels=none", MODELED_PATIENT),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(headers[header::CONTENT_TYPE], "application/json");
    let v = json(&body);
    assert_eq!(v["layout_version"], hfigures::LAYOUT_VERSION);
    assert_eq!(v["legend"].as_array().unwrap().len(), 1);
    assert!(v["labels"].as_array().unwrap().is_empty());
    assert_eq!(v["slots"]["sectors"].as_array().unwrap().len(), 9);
}

#[tokio::test]
async fn empty_object_is_400_with_path() {
    let (status, _, body) = call(router(ServiceConfig::default()), post("/render", "{}")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let v = json(&body);
    assert_eq!(v["path"], "$.groups");
    assert_eq!(v["kind"], "SchemaError");
}

#[tokio::test]
async fn range_error_is_400() {
    let bad = BLOOD_PRESSURE.replacen("\"min\": 90", "\"min\": 900", 1);
    assert_ne!(bad, BLOOD_PRESSURE, "fixture changed shape");
    let (status, _, body) = call(router(ServiceConfig::default()), post("/render", bad)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(json(&body)["path"], "$.groups[0].measurements[0].min");
}

#[tokio::test]
async fn body_limit_is_inclusive() {
    let limit = 4096;
    let app = router(ServiceConfig {
        max_body_bytes: limit,
        ..Default::default()
    });
    let padded = |n: usize| format!("{BLOOD_PRESSURE}{}", " ".repeat(n - BLOOD_PRESSURE.len()));

    let (status, _, _) = call(app.clone(), post("/render", padded(limit))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _, body) = call(app, post("/render", padded(limit + 1))).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(json(&body)["kind"], "PayloadTooLarge");
}

#[tokio::test]
async fn label_overflow_is_422() {
    let (status, _, body) = call(
        router(ServiceConfig::default()),
        post("/render?size=300", MODELED_PATIENT),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v = json(&body);
    assert_eq!(v["kind"], "LayoutOverflow");
    assert!(v["message"].as_str().unwrap().contains("--labels none"));

    let (status, _, _) = call(
        router(ServiceConfig::default()),
        post("/render?size=300&labels=none", MODELED_PATIENT),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn bad_queries_are_400() {
    for uri in [
        "/render?labels=some",
        "/render?snapshots=1,x",
        "/render?snapshots=5,4",
        "/render?latest=0",
        "/render?size=-3",
        "/render?bogus=1",
    ] {
        let (status, _, body) =
            call(router(ServiceConfig::default()), post(uri, MODELED_PATIENT)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
        assert!(json(&body)["message"].is_string());
    }
}

#[tokio::test]
async fn six_mib_body_is_rejected_at_default_limit() {
    let body = format!("{BLOOD_PRESSURE}{}", " ".repeat(6 * 1024 * 1024));
    let (status, _, _) = call(router(ServiceConfig::default()), post("/render", body)).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
}

#[tokio::test]
async fn healthz_version_is_the_build_version() {
    let (_, _, body) = call(
        router(ServiceConfig::default()),
        Request::get("/healthz").body(Body::empty()).unwrap(),
    )
    .await;
    assert_eq!(json(&body)["version"], env!("CARGO_PKG_VERSION"));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_identical_requests_agree() {
    let app = router(ServiceConfig::default());
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let app = app.clone();
            tokio::spawn(async move { call(app, post("/render?latest=2", MODELED_PATIENT)).await })
        })
        .collect();
    let mut bodies = Vec::new();
    for h in handles {
        let (status, _, body) = h.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        bodies.push(body);
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}
