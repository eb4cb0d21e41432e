//! Segment-level acoustic feature vector.
//!
//! Layout for `K` cepstral coefficients (default `K = 13`, `d = 126`):
//!
//! 1. `mfcc_mean_{k}` then `mfcc_std_{k}`, `k = 0..K`
//! 2. the same for first deltas (`mfcc_d1_*`) and second deltas (`mfcc_d2_*`)
//! 3. for each descriptor in `rms, zcr, spectral_centroid, spectral_bandwidth,
//!    spectral_rolloff, spectral_flatness`: `{name}_{stat}` for the eight
//!    statistics `mean, std, min, max, p25, p75, skew, kurtosis`
//!
//! Tree-ensemble model files must list exactly these names in this order.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use super::lld::{lld_from_spectrogram, LLD_NAMES};
use super::mfcc::{delta, mfcc_statistics, MfccBank};
use super::spectrum::Stft;
use super::stats::{summarize, SUMMARY_NAMES};
use super::{preprocess, AudioConfig, AudioError, Segment, Waveform};

pub fn feature_dim(n_mfcc: usize) -> usize {
    3 * 2 * n_mfcc + LLD_NAMES.len() * SUMMARY_NAMES.len()
}

/// Stable feature identifiers in vector order.
pub fn feature_names(n_mfcc: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(feature_dim(n_mfcc));
    for prefix in ["mfcc", "mfcc_d1", "mfcc_d2"] {
        for stat in ["mean", "std"] {
            for k in 0..n_mfcc {
                names.push(format!("{prefix}_{stat}_{k}"));
            }
        }
    }
    for lld in LLD_NAMES {
        for stat in SUMMARY_NAMES {
            names.push(format!("{lld}_{stat}"));
        }
    }
    names
}

/// Fixed-order named feature vector for one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcousticFeatureVector {
    pub segment_index: usize,
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

impl AcousticFeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }
}

/// Reusable extractor: plans the FFT and builds the filterbank once.
#[derive(Debug)]
pub struct FeatureExtractor {
    cfg: AudioConfig,
    stft: Stft,
    bank: MfccBank,
    names: Vec<String>,
}

impl Default for FeatureExtractor {
    fn default() -> Self {
        Self::new(AudioConfig::default())
    }
}

impl FeatureExtractor {
    pub fn new(cfg: AudioConfig) -> Self {
        Self {
            stft: Stft::new(&cfg),
            bank: MfccBank::new(&cfg),
            names: feature_names(cfg.n_mfcc),
            cfg,
        }
    }

    pub fn config(&self) -> &AudioConfig {
        &self.cfg
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn extract(&self, seg: &Segment) -> Result<AcousticFeatureVector, AudioError> {
        let spec = self.stft.spectrogram(seg.samples());
        let m = self.bank.from_spectrogram(&spec);
        let d1 = delta(&m, self.cfg.delta_half_window)?;
        let d2 = delta(&d1, self.cfg.delta_half_window)?;

        let mut values = Vec::with_capacity(self.names.len());
        for mat in [&m, &d1, &d2] {
            let (mu, sd) = mfcc_statistics(mat);
            values.extend(mu);
            values.extend(sd);
        }
        let lld = lld_from_spectrogram(seg, &self.stft, &spec, &self.cfg);
        for seq in lld.in_order() {
            values.extend(summarize(seq));
        }
        debug_assert_eq!(values.len(), self.names.len());
        Ok(AcousticFeatureVector {
            segment_index: seg.index(),
            names: self.names.clone(),
            values,
        })
    }

    /// Preprocess a recording and extract one vector per complete segment.
    pub fn extract_recording(
        &self,
        waveform: &Waveform,
    ) -> Result<Vec<AcousticFeatureVector>, AudioError> {
        preprocess(waveform, &self.cfg)?
            .iter()
            .map(|seg| self.extract(seg))
            .collect()
    }
}

/// Feature vector of one segment with the default configuration.
pub fn feature_vector(seg: &Segment) -> Result<AcousticFeatureVector, AudioError> {
    FeatureExtractor::default().extract(seg)
}

/// CSV with a header of feature names and one row per vector. Values use
/// Rust's shortest round-trip formatting.
pub fn to_csv(vectors: &[AcousticFeatureVector]) -> String {
    to_csv_with(vectors, |v| v.to_string())
}

/// Nine significant digits, the format used for committed golden files.
pub fn format_sig9(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn to_csv_with(vectors: &[AcousticFeatureVector], fmt: impl Fn(f64) -> String) -> String {
    let mut out = String::new();
    if let Some(first) = vectors.first() {
        out.push_str(&first.names.join(","));
        out.push('\n');
    }
    for v in vectors {
        let row: Vec<String> = v.values.iter().map(|&x| fmt(x)).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FeatureCsvError {
    #[error("empty feature CSV")]
    Empty,
    #[error("row {row}: expected {expected} columns, found {found}")]
    Width {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },
}

/// Parse the output of [`to_csv`]. Row order becomes `segment_index`.
pub fn from_csv(text: &str) -> Result<Vec<AcousticFeatureVector>, FeatureCsvError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or(FeatureCsvError::Empty)?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    lines
        .enumerate()
        .map(|(i, line)| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != names.len() {
                return Err(FeatureCsvError::Width {
                    row: i + 1,
                    expected: names.len(),
                    found: cells.len(),
                });
            }
            let values = cells
                .iter()
                .enumerate()
                .map(|(c, cell)| {
                    cell.trim().parse::<f64>().map_err(|e| FeatureCsvError::Parse {
                        row: i + 1,
                        column: c,
                        message: e.to_string(),
                    })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            Ok(AcousticFeatureVector {
                segment_index: i,
                names: names.clone(),
                values,
            })
        })
        .collect()
}
