//! Cough audio front end.
//!
//! `WAV bytes -> Waveform -> 2 s Segments -> STFT -> {MFCC, LLDs} -> z`
//!
//! Every stage is deterministic. The feature vector layout is fixed by
//! [`features::feature_names`] and is the contract shared with tree
//! ensemble model files.

pub mod features;
pub mod lld;
pub mod mfcc;
pub mod resample;
pub mod spectrum;
pub mod stats;
pub mod wav;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use features::{feature_names, AcousticFeatureVector, FeatureExtractor};
pub use mfcc::MfccMatrix;
pub use wav::ingest_wav;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AudioError {
    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt WAV header: {0}")]
    CorruptHeader(String),
    #[error("recording too short: {samples} samples at {rate} Hz, need {needed} for one segment")]
    TooShort {
        samples: usize,
        rate: u32,
        needed: usize,
    },
    #[error("delta computation needs at least 3 frames, got {0}")]
    TooFewFrames(usize),
    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),
}

/// Front-end parameters. Defaults are the conventional speech-processing
/// settings: 16 kHz, 25 ms frames with a 10 ms hop, 512-point FFT,
/// 26 mel filters and 13 cepstral coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AudioConfig {
    pub sample_rate: u32,
    pub segment_seconds: u32,
    pub peak_target: f64,
    pub frame_len: usize,
    pub hop: usize,
    pub n_fft: usize,
    pub n_mels: usize,
    pub n_mfcc: usize,
    pub fmin: f64,
    pub fmax: f64,
    pub log_floor: f64,
    pub delta_half_window: usize,
    pub rolloff_fraction: f64,
}

impl Default for AudioConfig {
    fn default() -> Self {
        Self {
            sample_rate: 16_000,
            segment_seconds: 2,
            peak_target: 0.95,
            frame_len: 400,
            hop: 160,
            n_fft: 512,
            n_mels: 26,
            n_mfcc: 13,
            fmin: 0.0,
            fmax: 8000.0,
            log_floor: 1e-10,
            delta_half_window: 2,
            rolloff_fraction: 0.85,
        }
    }
}

impl AudioConfig {
    pub fn segment_len(&self) -> usize {
        self.sample_rate as usize * self.segment_seconds as usize
    }

    pub fn frame_count(&self) -> usize {
        frame_count(self.segment_len(), self.frame_len, self.hop)
    }

    pub fn feature_dim(&self) -> usize {
        features::feature_dim(self.n_mfcc)
    }
}

/// `floor((len - frame_len) / hop) + 1`, or 0 when a single frame does not fit.
pub fn frame_count(len: usize, frame_len: usize, hop: usize) -> usize {
    if len < frame_len {
        0
    } else {
        (len - frame_len) / hop + 1
    }
}

/// Mono audio at a known rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::InvalidWaveform("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(AudioError::InvalidWaveform("no samples".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(AudioError::InvalidWaveform("non-finite sample".into()));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// A complete, peak-normalized analysis window.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    samples: Vec<f64>,
    index: usize,
}

impl Segment {
    /// Wraps already-normalized samples. Used by tests and by callers that
    /// bring their own segmentation.
    pub fn from_samples(samples: Vec<f64>, index: usize) -> Self {
        Self { samples, index }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn peak(&self) -> f64 {
        peak_abs(&self.samples)
    }
}

fn peak_abs(samples: &[f64]) -> f64 {
    samples.iter().fold(0.0_f64, |m, s| m.max(s.abs()))
}

/// Resample to the configured rate, cut into non-overlapping complete
/// segments, and peak-normalize each segment independently.
pub fn preprocess(waveform: &Waveform, cfg: &AudioConfig) -> Result<Vec<Segment>, AudioError> {
    let resampled = resample::resample(waveform.samples(), waveform.sample_rate(), cfg.sample_rate);
    let seg_len = cfg.segment_len();
    let count = resampled.len() / seg_len;
    if count == 0 {
        return Err(AudioError::TooShort {
            samples: resampled.len(),
            rate: cfg.sample_rate,
            needed: seg_len,
        });
    }
    let segments = resampled
        .chunks_exact(seg_len)
        .enumerate()
        .map(|(index, chunk)| {
            let peak = peak_abs(chunk);
            let samples = if peak > 0.0 {
                let gain = cfg.peak_target / peak;
                chunk.iter().map(|s| s * gain).collect()
            } else {
                chunk.to_vec()
            };
            Segment { samples, index }
        })
        .collect();
    Ok(segments)
}
