//! Fixtures shared by the service test targets.

#![allow(dead_code)]

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use pneumo_core::audio::wav::{encode_wav, SampleFormat};
use pneumo_core::gbdt::DEMO_MODEL_JSON;
use pneumo_service::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use std::path::Path;
use std::sync::Arc;
use tower::ServiceExt;

pub fn config(dir: &Path, with_model: bool) -> ServiceConfig {
    let model = with_model.then(|| {
        let p = dir.join("model.json");
        std::fs::write(&p, DEMO_MODEL_JSON).unwrap();
        p
    });
    ServiceConfig {
        model,
        data_dir: dir.join("data"),
        ..ServiceConfig::default()
    }
}

pub fn app(dir: &Path, with_model: bool) -> Router {
    router(Arc::new(AppState::new(config(dir, with_model)).unwrap()))
}

/// Decaying 420 Hz bursts, long enough for `seconds / 2` segments.
pub fn cough_wav(seconds: f64, rate: u32) -> Vec<u8> {
    let n = (f64::from(rate) * seconds) as usize;
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / f64::from(rate);
            0.6 * (-(t % 0.5) * 12.0).exp() * (2.0 * std::f64::consts::PI * 420.0 * t).sin()
        })
        .collect();
    encode_wav(&x, rate, 1, SampleFormat::Pcm16)
}

pub fn symptoms() -> Value {
    json!({
        "cough_or_difficult_breathing": true,
        "fever_or_chills": true,
        "shortness_of_breath": "Mild",
        "chest_pain_or_confusion": false,
        "major_risk_factor": false,
        "age_group": "FiveAndOver"
    })
}

pub async fn send(app: &Router, method: &str, uri: &str, content_type: &str, body: Vec<u8>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", content_type)
        .body(Body::from(body))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    send(app, "GET", uri, "application/json", Vec::new()).await
}

pub async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    send(app, "POST", uri, "application/json", body.to_string().into_bytes()).await
}

/// Serve `app` on an ephemeral port; returns the base URL.
pub async fn spawn(app: Router) -> (String, tokio::task::JoinHandle<()>) {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let handle = tokio::spawn(async move {
        axum::serve(listener, app).await.unwrap();
    });
    (base, handle)
}
