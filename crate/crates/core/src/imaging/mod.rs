//! Radiograph side: synthetic acquisition domains for robustness
//! evaluation, grayscale image I/O, and ingestion of externally produced
//! classifier probabilities.

pub mod io;
pub mod perturb;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub use perturb::{build_domain_dataset, perturb, DomainSample, PerturbConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImagingError {
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("unsupported image: {0}")]
    Unsupported(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("probability {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("invalid image signal record: {0}")]
    InvalidRecord(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ImagingError {
    fn from(e: std::io::Error) -> Self {
        ImagingError::Io(e.to_string())
    }
}

/// Single-channel image, row-major, intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::InvalidImage("zero dimension".into()));
        }
        if width * height != pixels.len() {
            return Err(ImagingError::InvalidImage(format!(
                "{width}x{height} needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if let Some(p) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(ImagingError::InvalidImage(format!("pixel {p} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self, ImagingError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    /// Internal constructor for transforms that guarantee the invariants.
    pub(crate) fn from_parts(width: usize, height: usize, pixels: Vec<f64>) -> Self {
        debug_assert_eq!(width * height, pixels.len());
        Self {
            width,
            height,
            pixels,
        }
    }
}

/// Synthetic acquisition domain. Integer codes are the `d` column of the
/// per-domain result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainLabel {
    Clean = 0,
    Blur = 1,
    Noise = 2,
    Contrast = 3,
}

impl DomainLabel {
    pub const ALL: [DomainLabel; 4] = [
        DomainLabel::Clean,
        DomainLabel::Blur,
        DomainLabel::Noise,
        DomainLabel::Contrast,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(usize::from(code)).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            DomainLabel::Clean => "Clean",
            DomainLabel::Blur => "Blur",
            DomainLabel::Noise => "Noise",
            DomainLabel::Contrast => "Contrast",
        }
    }
}

impl fmt::Display for DomainLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainLabel {
    type Err = String;

    /// Accepts the name (any case) or the integer code.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Ok(code) = t.parse::<u8>() {
            return Self::from_code(code).ok_or_else(|| format!("unknown domain code {code}"));
        }
        match t.to_ascii_lowercase().as_str() {
            "clean" => Ok(DomainLabel::Clean),
            "blur" => Ok(DomainLabel::Blur),
            "noise" => Ok(DomainLabel::Noise),
            "contrast" => Ok(DomainLabel::Contrast),
            _ => Err(format!("unknown domain {s:?}")),
        }
    }
}

/// Positive-class probability from an external radiograph classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageSignal {
    pub probability: f64,
    #[serde(default = "default_source")]
    pub source: String,
}

fn default_source() -> String {
    "unspecified".into()
}

impl ImageSignal {
    pub fn new(probability: f64, source: impl Into<String>) -> Result<Self, ImagingError> {
        if !(0.0..=1.0).contains(&probability) {
            return Err(ImagingError::OutOfRange(probability));
        }
        Ok(Self {
            probability,
            source: source.into(),
        })
    }
}

/// Validate an external `{ "probability": p, "source": "..." }` record.
pub fn ingest_image_signal(record: &serde_json::Value) -> Result<ImageSignal, ImagingError> {
    let raw: ImageSignal = serde_json::from_value(record.clone())
        .map_err(|e| ImagingError::InvalidRecord(e.to_string()))?;
    ImageSignal::new(raw.probability, raw.source)
}
