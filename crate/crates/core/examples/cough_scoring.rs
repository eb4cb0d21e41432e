// Tree-ensemble inference on cough features, plus a model built by hand.

use pneumo_core::audio::wav::{encode_wav, SampleFormat};
use pneumo_core::audio::FeatureExtractor;
use pneumo_core::gbdt::{score_wav, sigmoid, Aggregation, TreeEnsembleModel, DEMO_MODEL_JSON};
use serde_json::json;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let extractor = FeatureExtractor::default();

    // Two stumps on the first two features; everything else is unused.
    let hand_built = json!({
        "feature_count": 126,
        "feature_names": extractor.names(),
        "base_score": 0.0,
        "link": "logistic",
        "trees": [
            {"nodes": [{"feature": 0, "threshold": -50.0, "left": 1, "right": 2}, {"leaf": -1.0}, {"leaf": 1.0}]},
            {"nodes": [{"feature": 1, "threshold": 0.0, "left": 1, "right": 2}, {"leaf": -0.5}, {"leaf": 0.5}]}
        ]
    });
    let model = TreeEnsembleModel::from_json_with_schema(&serde_json::to_vec(&hand_built)?, extractor.names())?;
    let mut z = vec![0.0; 126];
    z[0] = -50.0; // tie goes right
    let p = model.score_values(&z)?;
    println!("tie at threshold routes right: p = {p:.6} (sigmoid(1.5) = {:.6})", sigmoid(1.5));
    assert_eq!(p, sigmoid(1.5));

    // The bundled demo model has made-up splits and exists only to
    // exercise the pipeline.
    let demo = TreeEnsembleModel::from_json_with_schema(DEMO_MODEL_JSON.as_bytes(), extractor.names())?;
    let samples: Vec<f64> = (0..80_000)
        .map(|i| 0.3 * (i as f64 * 0.07).sin() * if (i / 4000) % 3 == 0 { 1.0 } else { 0.1 })
        .collect();
    let wav = encode_wav(&samples, 16_000, 1, SampleFormat::Float32);
    for agg in [Aggregation::Mean, Aggregation::Max] {
        let s = score_wav(&wav, &demo, &extractor, agg)?;
        println!("{agg:?}: per-segment {:?} -> {:.4}", s.per_segment, s.recording_level);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
