//! Weighted late fusion of modality signals.
//!
//! `S = sum_m w_m * s_m` over the present modalities, with weights summing
//! to one. When a modality is absent the remaining weights are rescaled to
//! sum to one, so missing evidence is not read as negative evidence. The
//! rescaled weights are reported as `effective_weights`.
//!
//! Bands: HIGH if `S >= high`, MODERATE if `moderate <= S < high`, else LOW.
//! A triage escalation overrides the band with URGENT; `S` is left as is.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::triage::RiskBand;

pub use crate::report::render_report;

pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("no modality signal is present")]
    NoSignals,
    #[error("invalid fusion config: {0}")]
    InvalidConfig(String),
    #[error("signal {modality} = {value} is outside [0, 1]")]
    SignalOutOfRange { modality: Modality, value: f64 },
    #[error("modality {0} is not present")]
    MissingModality(Modality),
    #[error("shifting {delta} away from {modality} leaves a negative weight ({weight} available)")]
    NegativeWeight {
        modality: Modality,
        delta: f64,
        weight: f64,
    },
    #[error("invalid weight shift: {0}")]
    InvalidShift(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Img,
    Sym,
    Cgh,
    Sp,
}

impl Modality {
    pub const ALL: [Modality; 4] = [Modality::Img, Modality::Sym, Modality::Cgh, Modality::Sp];

    pub fn key(self) -> &'static str {
        match self {
            Modality::Img => "img",
            Modality::Sym => "sym",
            Modality::Cgh => "cgh",
            Modality::Sp => "sp",
        }
    }

    /// Reader-facing name used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Modality::Img => "imaging",
            Modality::Sym => "symptoms",
            Modality::Cgh => "cough",
            Modality::Sp => "speech",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Modality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "img" | "imaging" | "image" => Ok(Modality::Img),
            "sym" | "symptoms" => Ok(Modality::Sym),
            "cgh" | "cough" => Ok(Modality::Cgh),
            "sp" | "speech" => Ok(Modality::Sp),
            other => Err(format!("unknown modality {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModalityWeights {
    pub img: f64,
    pub sym: f64,
    pub cgh: f64,
    pub sp: f64,
}

impl ModalityWeights {
    pub fn get(&self, m: Modality) -> f64 {
        match m {
            Modality::Img => self.img,
            Modality::Sym => self.sym,
            Modality::Cgh => self.cgh,
            Modality::Sp => self.sp,
        }
    }

    pub fn set(&mut self, m: Modality, v: f64) {
        match m {
            Modality::Img => self.img = v,
            Modality::Sym => self.sym = v,
            Modality::Cgh => self.cgh = v,
            Modality::Sp => self.sp = v,
        }
    }

    pub fn sum(&self) -> f64 {
        Modality::ALL.iter().map(|&m| self.get(m)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub high: f64,
    pub moderate: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            high: 0.75,
            moderate: 0.50,
        }
    }
}

impl Thresholds {
    pub fn band(&self, score: f64) -> RiskBand {
        if score >= self.high {
            RiskBand::High
        } else if score >= self.moderate {
            RiskBand::Moderate
        } else {
            RiskBand::Low
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub weights: ModalityWeights,
    #[serde(default)]
    pub thresholds: Thresholds,
}

fn default_name() -> String {
    "custom".into()
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self::base()
    }
}

impl FusionConfig {
    fn preset(name: &str, img: f64, sym: f64, cgh: f64, sp: f64) -> Self {
        Self {
            name: name.into(),
            weights: ModalityWeights { img, sym, cgh, sp },
            thresholds: Thresholds::default(),
        }
    }

    /// Imaging 0.40, the other three 0.20 each.
    pub fn base() -> Self {
        Self::preset("Base setting", 0.40, 0.20, 0.20, 0.20)
    }

    /// The five reference weight configurations used for sensitivity
    /// inspection.
    pub fn presets() -> Vec<Self> {
        vec![
            Self::base(),
            Self::preset("Image-dominant", 0.55, 0.15, 0.15, 0.15),
            Self::preset("Cough-downweighted", 0.45, 0.25, 0.10, 0.20),
            Self::preset("Symptom-dominant", 0.30, 0.35, 0.15, 0.20),
            Self::preset("Balanced non-image", 0.25, 0.25, 0.25, 0.25),
        ]
    }

    /// Case- and punctuation-insensitive preset lookup
    /// (`image-dominant`, `Image dominant`, ...).
    pub fn preset_named(name: &str) -> Option<Self> {
        let norm = |s: &str| {
            s.chars()
                .filter(|c| c.is_alphanumeric())
                .collect::<String>()
                .to_lowercase()
        };
        let want = norm(name);
        Self::presets()
            .into_iter()
            .find(|p| norm(&p.name) == want || (want == "base" && p.name == "Base setting"))
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, FusionError> {
        let cfg: Self = serde_json::from_slice(bytes)
            .map_err(|e| FusionError::InvalidConfig(format!("invalid JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        for m in Modality::ALL {
            let w = self.weights.get(m);
            if !w.is_finite() || w < 0.0 {
                return Err(FusionError::InvalidConfig(format!("weight {m} = {w} must be >= 0")));
            }
        }
        let sum = self.weights.sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(FusionError::InvalidConfig(format!("weights sum to {sum}, not 1")));
        }
        let t = self.thresholds;
        if !(t.moderate > 0.0 && t.moderate < t.high && t.high <= 1.0) {
            return Err(FusionError::InvalidConfig(format!(
                "thresholds must satisfy 0 < moderate < high <= 1 (moderate {}, high {})",
                t.moderate, t.high
            )));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ModalitySignals {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub img: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sym: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cgh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sp: Option<f64>,
    #[serde(default)]
    pub urgent: bool,
}

impl ModalitySignals {
    pub fn get(&self, m: Modality) -> Option<f64> {
        match m {
            Modality::Img => self.img,
            Modality::Sym => self.sym,
            Modality::Cgh => self.cgh,
            Modality::Sp => self.sp,
        }
    }

    pub fn set(&mut self, m: Modality, v: Option<f64>) {
        match m {
            Modality::Img => self.img = v,
            Modality::Sym => self.sym = v,
            Modality::Cgh => self.cgh = v,
            Modality::Sp => self.sp = v,
        }
    }

    pub fn with(mut self, m: Modality, v: f64) -> Self {
        self.set(m, Some(v));
        self
    }

    pub fn present(&self) -> impl Iterator<Item = (Modality, f64)> + '_ {
        Modality::ALL.into_iter().filter_map(|m| self.get(m).map(|v| (m, v)))
    }

    /// Fill unset modalities from `other`; the urgent flag is OR-ed.
    pub fn merged_over(&self, other: &Self) -> Self {
        let mut out = *other;
        for (m, v) in self.present() {
            out.set(m, Some(v));
        }
        out.urgent = self.urgent || other.urgent;
        out
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        for (modality, value) in self.present() {
            if !(0.0..=1.0).contains(&value) {
                return Err(FusionError::SignalOutOfRange { modality, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionResult {
    pub score: f64,
    pub band: RiskBand,
    /// Band from the thresholds alone, before any urgent override.
    pub score_band: RiskBand,
    pub urgent: bool,
    pub contributions: BTreeMap<Modality, f64>,
    pub missing: Vec<Modality>,
    pub effective_weights: BTreeMap<Modality, f64>,
    /// The inputs the score was computed from.
    pub signals: ModalitySignals,
}

pub fn fuse(signals: &ModalitySignals, cfg: &FusionConfig) -> Result<FusionResult, FusionError> {
    cfg.validate()?;
    signals.validate()?;
    let present: Vec<(Modality, f64)> = signals.present().collect();
    if present.is_empty() {
        return Err(FusionError::NoSignals);
    }
    let present_weight: f64 = present.iter().map(|(m, _)| cfg.weights.get(*m)).sum();
    if present_weight <= 0.0 {
        return Err(FusionError::InvalidConfig(
            "the present modalities all have zero weight".into(),
        ));
    }

    let mut effective_weights = BTreeMap::new();
    let mut contributions = BTreeMap::new();
    let mut score = 0.0;
    for (m, s) in &present {
        let w = cfg.weights.get(*m) / present_weight;
        let c = w * s;
        effective_weights.insert(*m, w);
        contributions.insert(*m, c);
        score += c;
    }
    let score = score.clamp(0.0, 1.0);
    let missing = Modality::ALL
        .into_iter()
        .filter(|m| signals.get(*m).is_none())
        .collect();
    let score_band = cfg.thresholds.band(score);
    Ok(FusionResult {
        score,
        band: if signals.urgent { RiskBand::Urgent } else { score_band },
        score_band,
        urgent: signals.urgent,
        contributions,
        missing,
        effective_weights,
        signals: *signals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub delta: f64,
    pub from: Modality,
    pub to: Modality,
    /// `delta * (s_to - s_from)`.
    pub delta_s: f64,
    pub score_before: f64,
    pub score_after: f64,
    pub band_before: RiskBand,
    pub band_after: RiskBand,
    pub band_changed: bool,
}

/// Move `delta` of effective weight from one present modality to another
/// and report the change in fused score and band.
///
/// The shift is applied to the effective (post-rescaling) weights, so the
/// bound `|delta_s| <= delta` holds whether or not modalities are missing.
pub fn sensitivity(
    signals: &ModalitySignals,
    cfg: &FusionConfig,
    delta: f64,
    from: Modality,
    to: Modality,
) -> Result<Sensitivity, FusionError> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(FusionError::InvalidShift(format!("delta {delta} must be >= 0")));
    }
    if from == to {
        return Err(FusionError::InvalidShift("from and to are the same modality".into()));
    }
    let s_from = signals.get(from).ok_or(FusionError::MissingModality(from))?;
    let s_to = signals.get(to).ok_or(FusionError::MissingModality(to))?;
    let before = fuse(signals, cfg)?;

    let w_from = before.effective_weights[&from];
    if delta > w_from {
        return Err(FusionError::NegativeWeight {
            modality: from,
            delta,
            weight: w_from,
        });
    }
    let mut shifted = ModalityWeights {
        img: 0.0,
        sym: 0.0,
        cgh: 0.0,
        sp: 0.0,
    };
    for (m, w) in &before.effective_weights {
        shifted.set(*m, *w);
    }
    shifted.set(from, w_from - delta);
    shifted.set(to, shifted.get(to) + delta);
    let shifted_cfg = FusionConfig {
        name: format!("{} ({delta} {from}->{to})", cfg.name),
        weights: shifted,
        thresholds: cfg.thresholds,
    };
    let after = fuse(signals, &shifted_cfg)?;
    let delta_s = delta * (s_to - s_from);
    debug_assert!(delta_s.abs() <= delta);
    Ok(Sensitivity {
        delta,
        from,
        to,
        delta_s,
        score_before: before.score,
        score_after: after.score,
        band_before: before.band,
        band_after: after.band,
        band_changed: before.band != after.band,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub config: String,
    pub weights: ModalityWeights,
    pub score: f64,
    pub band: RiskBand,
}

pub fn sweep_configs(
    signals: &ModalitySignals,
    configs: &[FusionConfig],
) -> Result<Vec<SweepRow>, FusionError> {
    configs
        .iter()
        .map(|cfg| {
            let r = fuse(signals, cfg)?;
            Ok(SweepRow {
                config: cfg.name.clone(),
                weights: cfg.weights,
                score: r.score,
                band: r.band,
            })
        })
        .collect()
}
