//! Structured symptom triage.
//!
//! Four weighted indicators produce an integer score in `0..=6`, which is
//! thresholded into LOW / MODERATE / HIGH. A small set of escalation rules
//! bypasses the additive score entirely and forces URGENT; the score is
//! still computed so the audit trail shows what the additive path would
//! have said.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Weight of cough or difficult breathing.
pub const WEIGHT_COUGH: u8 = 2;
/// Weight of fever or chills.
pub const WEIGHT_FEVER: u8 = 1;
/// Weight of mild (not severe) shortness of breath.
pub const WEIGHT_MILD_SOB: u8 = 2;
/// Weight of a major risk factor.
pub const WEIGHT_RISK_FACTOR: u8 = 1;
/// Largest attainable additive score.
pub const MAX_SCORE: u8 = WEIGHT_COUGH + WEIGHT_FEVER + WEIGHT_MILD_SOB + WEIGHT_RISK_FACTOR;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TriageError {
    #[error("invalid response: {0}")]
    InvalidResponse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShortnessOfBreath {
    #[serde(alias = "none")]
    None,
    #[serde(alias = "mild")]
    Mild,
    #[serde(alias = "severe")]
    Severe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgeGroup {
    #[serde(alias = "under_five")]
    UnderFive,
    #[serde(alias = "five_and_over")]
    FiveAndOver,
}

/// One patient's questionnaire answers.
///
/// `chest_indrawing` and `unable_to_drink_or_feed` only apply to children
/// under five; setting either for an older patient is rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymptomResponse {
    pub cough_or_difficult_breathing: bool,
    pub fever_or_chills: bool,
    pub shortness_of_breath: ShortnessOfBreath,
    pub chest_pain_or_confusion: bool,
    pub major_risk_factor: bool,
    pub age_group: AgeGroup,
    #[serde(default)]
    pub chest_indrawing: bool,
    #[serde(default)]
    pub unable_to_drink_or_feed: bool,
}

impl SymptomResponse {
    /// Adult response with every indicator false.
    pub fn healthy_adult() -> Self {
        Self {
            cough_or_difficult_breathing: false,
            fever_or_chills: false,
            shortness_of_breath: ShortnessOfBreath::None,
            chest_pain_or_confusion: false,
            major_risk_factor: false,
            age_group: AgeGroup::FiveAndOver,
            chest_indrawing: false,
            unable_to_drink_or_feed: false,
        }
    }

    pub fn validate(&self) -> Result<(), TriageError> {
        if self.age_group == AgeGroup::FiveAndOver {
            if self.chest_indrawing {
                return Err(TriageError::InvalidResponse(
                    "chest_indrawing is only meaningful for age_group UnderFive".into(),
                ));
            }
            if self.unable_to_drink_or_feed {
                return Err(TriageError::InvalidResponse(
                    "unable_to_drink_or_feed is only meaningful for age_group UnderFive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Ordinal screening category. Ordering is `Low < Moderate < High < Urgent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RiskBand {
    Low,
    Moderate,
    High,
    Urgent,
}

impl RiskBand {
    pub fn as_str(self) -> &'static str {
        match self {
            RiskBand::Low => "LOW",
            RiskBand::Moderate => "MODERATE",
            RiskBand::High => "HIGH",
            RiskBand::Urgent => "URGENT",
        }
    }
}

impl fmt::Display for RiskBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hard escalation rules. Serialized names are stable identifiers used by
/// reports and the UI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UrgentRule {
    SevereSob,
    ChestPainOrConfusion,
    ChestIndrawing,
    UnableToDrinkOrFeed,
}

impl UrgentRule {
    pub fn id(self) -> &'static str {
        match self {
            UrgentRule::SevereSob => "severe_sob",
            UrgentRule::ChestPainOrConfusion => "chest_pain_or_confusion",
            UrgentRule::ChestIndrawing => "chest_indrawing",
            UrgentRule::UnableToDrinkOrFeed => "unable_to_drink_or_feed",
        }
    }
}

impl fmt::Display for UrgentRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriageResult {
    pub score: u8,
    pub normalized: f64,
    pub band: RiskBand,
    pub urgent_rules_fired: Vec<UrgentRule>,
}

impl TriageResult {
    pub fn is_urgent(&self) -> bool {
        !self.urgent_rules_fired.is_empty()
    }
}

/// Band for a non-escalated additive score.
pub fn band_for_score(score: u8) -> RiskBand {
    match score {
        0..=2 => RiskBand::Low,
        3..=4 => RiskBand::Moderate,
        _ => RiskBand::High,
    }
}

fn additive_score(r: &SymptomResponse) -> u8 {
    let mut score = 0;
    if r.cough_or_difficult_breathing {
        score += WEIGHT_COUGH;
    }
    if r.fever_or_chills {
        score += WEIGHT_FEVER;
    }
    // severe SOB escalates instead of scoring
    if r.shortness_of_breath == ShortnessOfBreath::Mild {
        score += WEIGHT_MILD_SOB;
    }
    if r.major_risk_factor {
        score += WEIGHT_RISK_FACTOR;
    }
    score
}

fn fired_rules(r: &SymptomResponse) -> Vec<UrgentRule> {
    let mut fired = Vec::new();
    if r.shortness_of_breath == ShortnessOfBreath::Severe {
        fired.push(UrgentRule::SevereSob);
    }
    if r.chest_pain_or_confusion {
        fired.push(UrgentRule::ChestPainOrConfusion);
    }
    if r.age_group == AgeGroup::UnderFive {
        if r.chest_indrawing {
            fired.push(UrgentRule::ChestIndrawing);
        }
        if r.unable_to_drink_or_feed {
            fired.push(UrgentRule::UnableToDrinkOrFeed);
        }
    }
    fired
}

/// Score a questionnaire response.
pub fn evaluate_triage(response: &SymptomResponse) -> Result<TriageResult, TriageError> {
    response.validate()?;
    let score = additive_score(response);
    let urgent_rules_fired = fired_rules(response);
    let band = if urgent_rules_fired.is_empty() {
        band_for_score(score)
    } else {
        RiskBand::Urgent
    };
    Ok(TriageResult {
        score,
        normalized: f64::from(score) / f64::from(MAX_SCORE),
        band,
        urgent_rules_fired,
    })
}
