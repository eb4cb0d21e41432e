// One screening encounter over HTTP: start the service on a free port,
// post each channel against a draft, fuse, then read the journal back.

use pneumo_core::audio::wav::{encode_wav, SampleFormat};
use pneumo_core::gbdt::DEMO_MODEL_JSON;
use pneumo_service::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use std::sync::Arc;

fn tone_burst(seconds: f64) -> Vec<u8> {
    let n = (16_000.0 * seconds) as usize;
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / 16_000.0;
            let env = (-(t % 0.5) * 12.0).exp();
            0.6 * env * (2.0 * std::f64::consts::PI * 420.0 * t).sin()
        })
        .collect();
    encode_wav(&x, 16_000, 1, SampleFormat::Pcm16)
}

async fn walkthrough(base: &str) -> Result<(), Box<dyn std::error::Error>> {
    let http = reqwest::Client::new();
    let draft: Value = http.post(format!("{base}/encounters")).send().await?.json().await?;
    let id = draft["id"].as_str().unwrap().to_string();
    println!("draft {id}");

    let triage: Value = http
        .post(format!("{base}/triage?encounter_id={id}"))
        .json(&json!({
            "cough_or_difficult_breathing": true, "fever_or_chills": true,
            "shortness_of_breath": "Mild", "chest_pain_or_confusion": false,
            "major_risk_factor": false, "age_group": "FiveAndOver"
        }))
        .send()
        .await?
        .json()
        .await?;
    println!("triage   score {} band {}", triage["score"], triage["band"]);

    let cough: Value = http
        .post(format!("{base}/cough?encounter_id={id}"))
        .header("content-type", "audio/wav")
        .body(tone_burst(5.0))
        .send()
        .await?
        .json()
        .await?;
    println!("cough    {:.4} over {} segments", cough["recording_level"].as_f64().unwrap(),
        cough["per_segment"].as_array().unwrap().len());

    let speech: Value = http
        .post(format!("{base}/transcript?encounter_id={id}"))
        .json(&json!({"text": "I have had a fever and a bad cough since Monday"}))
        .send()
        .await?
        .json()
        .await?;
    println!("speech   {}", speech["score"]);

    http.post(format!("{base}/image-signal?encounter_id={id}"))
        .json(&json!({"probability": 0.9, "source": "external-cxr-model"}))
        .send()
        .await?
        .error_for_status()?;

    let fused = http.post(format!("{base}/fuse?encounter_id={id}")).send().await?;
    assert_eq!(fused.status(), 201);
    let fused: Value = fused.json().await?;
    println!("fused    {:.4} {}", fused["fusion"]["score"].as_f64().unwrap(), fused["fusion"]["band"]);
    println!("{}", fused["report"].as_str().unwrap());

    let again = http
        .post(format!("{base}/transcript?encounter_id={id}"))
        .json(&json!({"text": "also chest pain"}))
        .send()
        .await?;
    println!("late update -> {}", again.status());

    let list: Vec<Value> = http.get(format!("{base}/encounters")).send().await?.json().await?;
    println!("journal holds {} encounter(s)", list.len());
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let model = dir.path().join("model.json");
    std::fs::write(&model, DEMO_MODEL_JSON)?;
    let config = ServiceConfig {
        model: Some(model),
        data_dir: dir.path().join("data"),
        ..ServiceConfig::default()
    };
    let state = Arc::new(AppState::new(config)?);

    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
        let base = format!("http://{}", listener.local_addr()?);
        let server = tokio::spawn(async move { axum::serve(listener, router(state)).await });
        let result = walkthrough(&base).await;
        server.abort();
        result
    })
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
