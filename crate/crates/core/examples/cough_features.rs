// Cough audio front end: WAV bytes to 126-dimensional segment vectors.

use pneumo_core::audio::features::to_csv;
use pneumo_core::audio::wav::{encode_wav, SampleFormat};
use pneumo_core::audio::{ingest_wav, preprocess, AudioConfig, FeatureExtractor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Five seconds of noise bursts over a faint 180 Hz hum, at 44.1 kHz.
pub fn synthetic_cough(seconds: f64, rate: u32, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (seconds * f64::from(rate)) as usize;
    (0..n)
        .map(|i| {
            let t = i as f64 / f64::from(rate);
            let phase = (t * 1.3).fract();
            let envelope = if phase < 0.25 { (-(phase * 18.0)).exp() } else { 0.0 };
            let hum = 0.05 * (2.0 * std::f64::consts::PI * 180.0 * t).sin();
            0.6 * envelope * rng.random_range(-1.0..1.0) + hum
        })
        .collect()
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let wav = encode_wav(&synthetic_cough(5.0, 44_100, 7), 44_100, 1, SampleFormat::Pcm16);
    let waveform = ingest_wav(&wav)?;
    println!("{:.2} s at {} Hz", waveform.duration_seconds(), waveform.sample_rate());

    let cfg = AudioConfig::default();
    let segments = preprocess(&waveform, &cfg)?;
    println!("{} complete 2 s segments (the tail is dropped)", segments.len());
    assert_eq!(segments.len(), 2);

    let extractor = FeatureExtractor::new(cfg);
    let vectors = extractor.extract_recording(&waveform)?;
    for v in &vectors {
        println!(
            "segment {}: {} features, mfcc_mean_1 {:.3}, zcr_mean {:.4}, spectral_centroid_mean {:.1} Hz",
            v.segment_index,
            v.len(),
            v.get("mfcc_mean_1").unwrap(),
            v.get("zcr_mean").unwrap(),
            v.get("spectral_centroid_mean").unwrap()
        );
    }
    let csv = to_csv(&vectors);
    println!("CSV header starts: {}", &csv[..csv.find(',').unwrap()]);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
