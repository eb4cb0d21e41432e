mod support;

use pneumo_core::audio::features::{feature_dim, feature_names, FeatureExtractor};
use pneumo_core::audio::resample::resample;
use pneumo_core::audio::spectrum::{bin_frequencies, Stft};
use pneumo_core::audio::wav::{encode_wav, SampleFormat};
use pneumo_core::audio::{ingest_wav, preprocess, AudioConfig, Segment, Waveform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use support::{close, Dft};

fn tone(freq: f64, rate: u32, seconds: f64, amp: f64) -> Vec<f64> {
    let n = (f64::from(rate) * seconds) as usize;
    (0..n).map(|i| amp * (2.0 * PI * freq * i as f64 / f64::from(rate)).sin()).collect()
}

/// Random segment with some structure: noise, a tone and an envelope.
fn random_segment(seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f0 = rng.random_range(100.0..3000.0);
    let noise = rng.random_range(0.05..1.0);
    let raw: Vec<f64> = (0..32_000)
        .map(|i| {
            let t = i as f64 / 16_000.0;
            let env = 0.5 + 0.5 * (2.0 * PI * 1.7 * t).sin();
            env * ((2.0 * PI * f0 * t).sin() + noise * rng.random_range(-1.0..1.0))
        })
        .collect();
    support::normalize(&raw)
}

#[test]
fn twenty_random_segments_match_the_reference_pipeline() {
    let extractor = FeatureExtractor::default();
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let seg = random_segment(seed);
        let got = extractor.extract(&Segment::from_samples(seg.clone(), 0)).unwrap();
        let want = support::features(&seg);
        assert_eq!(got.values.len(), want.len());
        for (i, (a, b)) in got.values.iter().zip(&want).enumerate() {
            assert!(close(*a, *b, 1e-6), "seed {seed} {}: {a} vs {b}", got.names[i]);
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    eprintln!("worst scaled deviation {worst:.3e}");
}

#[test]
fn spectrum_matches_naive_dft() {
    let seg = random_segment(99);
    let stft = Stft::new(&AudioConfig::default());
    let spec = stft.spectrogram(&seg);
    let dft = Dft::new();
    for (t, frame) in support::frames(&seg).iter().enumerate().step_by(37) {
        let want = dft.power(&support::windowed(frame));
        for (a, b) in spec.power[t].iter().zip(&want) {
            assert!(close(*a, *b, 1e-9), "{a} vs {b}");
        }
    }
}

#[test]
fn one_kilohertz_tone_centroid() {
    let cfg = AudioConfig::default();
    let seg = Segment::from_samples(support::normalize(&tone(1000.0, 16_000, 2.0, 0.5)), 0);
    let v = FeatureExtractor::new(cfg.clone()).extract(&seg).unwrap();
    let bin = f64::from(cfg.sample_rate) / cfg.n_fft as f64;
    let c = v.get("spectral_centroid_mean").unwrap();
    assert!((c - 1000.0).abs() <= bin, "centroid {c}");
}

fn dominant_bin(x: &[f64]) -> usize {
    let frame: Vec<f64> = support::windowed(&x[4000..4400]);
    let p = Dft::new().power(&frame);
    (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap()
}

#[test]
fn resampled_tone_keeps_dominant_bin() {
    for rate in [44_100u32, 48_000, 22_050, 8_000] {
        let x = resample(&tone(1000.0, rate, 1.0, 0.5), rate, 16_000);
        assert_eq!(dominant_bin(&x), 32, "from {rate} Hz");
    }
    let freqs = bin_frequencies(512, 16_000);
    assert_eq!(freqs[32], 1000.0);
}

#[test]
fn resampling_rejects_content_above_new_nyquist() {
    // Tones above 8 kHz must not fold back into the band after resampling.
    // A 32-tap kernel has a wide transition band, so attenuation is only
    // moderate just above the new Nyquist and strong further out.
    let passband = resample(&tone(3_000.0, 44_100, 1.0, 0.5), 44_100, 16_000);
    let energy = |v: &[f64]| v[2000..14_000].iter().map(|s| s * s).sum::<f64>();
    for (freq, max_ratio) in [(10_000.0, 1e-2), (14_000.0, 1e-4)] {
        let x = resample(&tone(freq, 44_100, 1.0, 0.5), 44_100, 16_000);
        let ratio = energy(&x) / energy(&passband);
        assert!(ratio < max_ratio, "{freq} Hz leaks {ratio:.2e}");
    }
}

#[test]
fn dimension_and_names_are_stable() {
    assert_eq!(feature_dim(13), 126);
    let names = feature_names(13);
    assert_eq!(names.len(), 126);
    let stats = ["mean", "std", "min", "max", "p25", "p75", "skew", "kurtosis"];
    let mut expected = Vec::new();
    for block in ["mfcc", "mfcc_d1", "mfcc_d2"] {
        for s in ["mean", "std"] {
            expected.extend((0..13).map(|k| format!("{block}_{s}_{k}")));
        }
    }
    for lld in ["rms", "zcr", "spectral_centroid", "spectral_bandwidth", "spectral_rolloff", "spectral_flatness"] {
        expected.extend(stats.iter().map(|s| format!("{lld}_{s}")));
    }
    assert_eq!(names, expected);
}

#[test]
fn amplitude_scaling_is_removed_by_normalization() {
    let cfg = AudioConfig::default();
    let extractor = FeatureExtractor::new(cfg.clone());
    let raw = tone(440.0, 16_000, 4.5, 0.2)
        .iter()
        .zip(random_segment(3).iter().cycle())
        .map(|(a, b)| a + 0.1 * b)
        .collect::<Vec<_>>();
    let w = Waveform::new(raw, 16_000).unwrap();
    let base = extractor.extract_recording(&w).unwrap();

    // Powers of two scale without rounding, so the match is exact.
    for c in [0.25, 2.0, 8.0] {
        assert_eq!(extractor.extract_recording(&w.scaled(c)).unwrap(), base);
    }
    for c in [0.3, 1.7, 13.0] {
        let scaled = extractor.extract_recording(&w.scaled(c)).unwrap();
        for (a, b) in scaled.iter().zip(&base) {
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!(close(*x, *y, 1e-9), "c = {c}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn wav_formats_agree() {
    let x = tone(300.0, 22_050, 2.5, 0.4);
    let pcm = ingest_wav(&encode_wav(&x, 22_050, 1, SampleFormat::Pcm16)).unwrap();
    let flt = ingest_wav(&encode_wav(&x, 22_050, 1, SampleFormat::Float32)).unwrap();
    let cfg = AudioConfig::default();
    let a = preprocess(&pcm, &cfg).unwrap();
    let b = preprocess(&flt, &cfg).unwrap();
    assert_eq!(a.len(), 1);
    for (s, t) in a[0].samples().iter().zip(b[0].samples()) {
        assert!((s - t).abs() < 1e-3);
    }
}
