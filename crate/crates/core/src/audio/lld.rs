//! Frame-level low-level descriptors.
//!
//! RMS and zero-crossing rate use the raw frame. The four spectral
//! descriptors use the Hann-windowed one-sided spectrum: centroid,
//! bandwidth and rolloff weight bins by magnitude, flatness uses power.
//!
//! Silence conventions: a frame with an all-zero spectrum has centroid,
//! bandwidth and rolloff 0 and flatness 1 (every bin sits on the floor).

use serde::{Deserialize, Serialize};

use super::spectrum::{bin_frequencies, Spectrogram, Stft};
use super::{AudioConfig, Segment};

/// Descriptor order used throughout the feature vector.
pub const LLD_NAMES: [&str; 6] = [
    "rms",
    "zcr",
    "spectral_centroid",
    "spectral_bandwidth",
    "spectral_rolloff",
    "spectral_flatness",
];

/// Six per-frame descriptor sequences of equal length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LldSequences {
    pub rms: Vec<f64>,
    pub zcr: Vec<f64>,
    pub centroid: Vec<f64>,
    pub bandwidth: Vec<f64>,
    pub rolloff: Vec<f64>,
    pub flatness: Vec<f64>,
}

impl LldSequences {
    /// Sequences in [`LLD_NAMES`] order.
    pub fn in_order(&self) -> [&[f64]; 6] {
        [
            &self.rms,
            &self.zcr,
            &self.centroid,
            &self.bandwidth,
            &self.rolloff,
            &self.flatness,
        ]
    }
}

pub fn rms(frame: &[f64]) -> f64 {
    (frame.iter().map(|x| x * x).sum::<f64>() / frame.len() as f64).sqrt()
}

/// Sign changes between adjacent samples divided by frame length. Zero
/// counts as positive.
pub fn zero_crossing_rate(frame: &[f64]) -> f64 {
    let crossings = frame
        .windows(2)
        .filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0))
        .count();
    crossings as f64 / frame.len() as f64
}

pub fn spectral_centroid(magnitude: &[f64], freqs: &[f64]) -> f64 {
    let total: f64 = magnitude.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    magnitude.iter().zip(freqs).map(|(m, f)| m * f).sum::<f64>() / total
}

pub fn spectral_bandwidth(magnitude: &[f64], freqs: &[f64], centroid: f64) -> f64 {
    let total: f64 = magnitude.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let spread: f64 = magnitude
        .iter()
        .zip(freqs)
        .map(|(m, f)| m * (f - centroid) * (f - centroid))
        .sum();
    (spread / total).sqrt()
}

/// Lowest bin frequency at which cumulative magnitude reaches `fraction`
/// of the total.
pub fn spectral_rolloff(magnitude: &[f64], freqs: &[f64], fraction: f64) -> f64 {
    let total: f64 = magnitude.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let target = fraction * total;
    let mut cum = 0.0;
    for (m, f) in magnitude.iter().zip(freqs) {
        cum += m;
        if cum >= target {
            return *f;
        }
    }
    *freqs.last().unwrap_or(&0.0)
}

/// Geometric over arithmetic mean of the floored power spectrum.
pub fn spectral_flatness(power: &[f64], floor: f64) -> f64 {
    let n = power.len() as f64;
    let log_mean = power.iter().map(|p| p.max(floor).ln()).sum::<f64>() / n;
    let mean = power.iter().map(|p| p.max(floor)).sum::<f64>() / n;
    log_mean.exp() / mean
}

/// Descriptors from a precomputed spectrogram of the same segment.
pub fn lld_from_spectrogram(
    seg: &Segment,
    stft: &Stft,
    spec: &Spectrogram,
    cfg: &AudioConfig,
) -> LldSequences {
    let freqs = bin_frequencies(cfg.n_fft, cfg.sample_rate);
    let (rms_seq, zcr_seq): (Vec<f64>, Vec<f64>) = stft
        .frames(seg.samples())
        .map(|frame| (rms(frame), zero_crossing_rate(frame)))
        .unzip();
    let mut out = LldSequences {
        rms: rms_seq,
        zcr: zcr_seq,
        centroid: Vec::with_capacity(spec.frames()),
        bandwidth: Vec::with_capacity(spec.frames()),
        rolloff: Vec::with_capacity(spec.frames()),
        flatness: Vec::with_capacity(spec.frames()),
    };
    for (mag, pow) in spec.magnitude.iter().zip(&spec.power) {
        let c = spectral_centroid(mag, &freqs);
        out.centroid.push(c);
        out.bandwidth.push(spectral_bandwidth(mag, &freqs, c));
        out.rolloff.push(spectral_rolloff(mag, &freqs, cfg.rolloff_fraction));
        out.flatness.push(spectral_flatness(pow, cfg.log_floor));
    }
    out
}

pub fn lld_features(seg: &Segment, cfg: &AudioConfig) -> LldSequences {
    let stft = Stft::new(cfg);
    let spec = stft.spectrogram(seg.samples());
    lld_from_spectrogram(seg, &stft, &spec, cfg)
}
