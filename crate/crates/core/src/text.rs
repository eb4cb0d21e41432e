//! Keyword-based concern signal from a transcript.
//!
//! The transcript is tokenized (split on anything that is not a letter or
//! digit, lowercased) and every vocabulary phrase is matched as an exact
//! token sequence. With `C` categories matched at least once and `E` extra
//! occurrences beyond the first in each category:
//!
//! `score = min(1, 0.25 * C + 0.05 * E)`
//!
//! Presence dominates, repetition is a mild boost. This is a heuristic and
//! there is no negation handling ("no fever" still matches `fever`).

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const CATEGORY_WEIGHT: f64 = 0.25;
pub const REPEAT_WEIGHT: f64 = 0.05;

const DEFAULT_VOCABULARY: &str = include_str!("../data/default_vocabulary.json");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VocabularyError {
    #[error("vocabulary JSON is invalid: {0}")]
    Parse(String),
    #[error("vocabulary is missing category {0}")]
    MissingCategory(&'static str),
    #[error("category {0} has no phrases")]
    EmptyCategory(&'static str),
    #[error("phrase {phrase:?} in {category} is not lowercase and whitespace-normalized")]
    UnnormalizedPhrase {
        category: &'static str,
        phrase: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Fever,
    Cough,
    Breathlessness,
    ChestDiscomfort,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Fever,
        Category::Cough,
        Category::Breathlessness,
        Category::ChestDiscomfort,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Fever => "fever",
            Category::Cough => "cough",
            Category::Breathlessness => "breathlessness",
            Category::ChestDiscomfort => "chest_discomfort",
        }
    }
}

/// Lowercased alphanumeric tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Four non-empty categories of lowercase, single-space-separated phrases.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct KeywordVocabulary {
    categories: BTreeMap<Category, Vec<String>>,
}

impl KeywordVocabulary {
    pub fn new(categories: BTreeMap<Category, Vec<String>>) -> Result<Self, VocabularyError> {
        for cat in Category::ALL {
            let phrases = categories
                .get(&cat)
                .ok_or(VocabularyError::MissingCategory(cat.name()))?;
            if phrases.is_empty() {
                return Err(VocabularyError::EmptyCategory(cat.name()));
            }
            for phrase in phrases {
                if tokenize(phrase).join(" ") != *phrase {
                    return Err(VocabularyError::UnnormalizedPhrase {
                        category: cat.name(),
                        phrase: phrase.clone(),
                    });
                }
            }
        }
        Ok(Self { categories })
    }

    pub fn from_json(text: &str) -> Result<Self, VocabularyError> {
        let categories: BTreeMap<Category, Vec<String>> =
            serde_json::from_str(text).map_err(|e| VocabularyError::Parse(e.to_string()))?;
        Self::new(categories)
    }

    pub fn phrases(&self, category: Category) -> &[String] {
        &self.categories[&category]
    }
}

impl Default for KeywordVocabulary {
    fn default() -> Self {
        Self::from_json(DEFAULT_VOCABULARY).expect("bundled vocabulary is valid")
    }
}

impl<'de> Deserialize<'de> for KeywordVocabulary {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let categories = BTreeMap::<Category, Vec<String>>::deserialize(d)?;
        Self::new(categories).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhraseCount {
    pub phrase: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeechSignal {
    pub score: f64,
    /// Only categories and phrases with at least one occurrence.
    pub matched: BTreeMap<Category, Vec<PhraseCount>>,
}

/// Score recomputed from match counts alone.
pub fn score_from_matches(matched: &BTreeMap<Category, Vec<PhraseCount>>) -> f64 {
    let mut categories = 0usize;
    let mut extra = 0usize;
    for phrases in matched.values() {
        let total: usize = phrases.iter().map(|p| p.count).sum();
        if total > 0 {
            categories += 1;
            extra += total - 1;
        }
    }
    (CATEGORY_WEIGHT * categories as f64 + REPEAT_WEIGHT * extra as f64).min(1.0)
}

fn count_occurrences(tokens: &[String], phrase: &[String]) -> usize {
    if phrase.is_empty() || phrase.len() > tokens.len() {
        return 0;
    }
    tokens.windows(phrase.len()).filter(|w| *w == phrase).count()
}

pub fn analyze_transcript(text: &str, vocab: &KeywordVocabulary) -> SpeechSignal {
    let tokens = tokenize(text);
    let mut matched = BTreeMap::new();
    for (cat, phrases) in &vocab.categories {
        let hits: Vec<PhraseCount> = phrases
            .iter()
            .filter_map(|p| {
                let count = count_occurrences(&tokens, &tokenize(p));
                (count > 0).then(|| PhraseCount {
                    phrase: p.clone(),
                    count,
                })
            })
            .collect();
        if !hits.is_empty() {
            matched.insert(*cat, hits);
        }
    }
    SpeechSignal {
        score: score_from_matches(&matched),
        matched,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_transcript() {
        let s = analyze_transcript("", &KeywordVocabulary::default());
        assert_eq!(s.score, 0.0);
        assert!(s.matched.is_empty());
    }

    #[test]
    fn one_per_category() {
        let s = analyze_transcript(
            "I had a fever, a bad cough, I am short of breath and have chest pain.",
            &KeywordVocabulary::default(),
        );
        assert_eq!(s.matched.len(), 4);
        assert_eq!(s.score, 1.0);
    }

    #[test]
    fn repeated_fever() {
        let s = analyze_transcript("fever fever fever", &KeywordVocabulary::default());
        assert!((s.score - 0.35).abs() < 1e-15);
        assert_eq!(
            s.matched[&Category::Fever],
            vec![PhraseCount { phrase: "fever".into(), count: 3 }]
        );
    }

    #[test]
    fn case_and_punctuation() {
        let v = KeywordVocabulary::default();
        assert_eq!(
            analyze_transcript("Fever!", &v),
            analyze_transcript("fever", &v)
        );
        assert_eq!(analyze_transcript("SHORT-of-BREATH", &v).score, 0.25);
    }

    #[test]
    fn multiword_needs_adjacent_tokens() {
        let v = KeywordVocabulary::default();
        assert_eq!(analyze_transcript("chest and pain", &v).score, 0.0);
        assert_eq!(analyze_transcript("no feverish feeling", &v).score, 0.0);
    }

    #[test]
    fn clamps_at_one() {
        let text = "fever ".repeat(30) + "cough chest pain wheezing";
        assert_eq!(analyze_transcript(&text, &KeywordVocabulary::default()).score, 1.0);
    }

    #[test]
    fn vocabulary_validation() {
        assert!(matches!(
            KeywordVocabulary::from_json(r#"{"fever":["fever"],"cough":["cough"],"breathlessness":["wheezing"]}"#),
            Err(VocabularyError::MissingCategory("chest_discomfort"))
        ));
        assert!(matches!(
            KeywordVocabulary::from_json(r#"{"fever":[],"cough":["cough"],"breathlessness":["x"],"chest_discomfort":["y"]}"#),
            Err(VocabularyError::EmptyCategory("fever"))
        ));
        assert!(matches!(
            KeywordVocabulary::from_json(r#"{"fever":["Fever"],"cough":["cough"],"breathlessness":["x"],"chest_discomfort":["y"]}"#),
            Err(VocabularyError::UnnormalizedPhrase { .. })
        ));
        assert!(matches!(
            KeywordVocabulary::from_json(r#"{"fever":["a  b"],"cough":["cough"],"breathlessness":["x"],"chest_discomfort":["y"]}"#),
            Err(VocabularyError::UnnormalizedPhrase { .. })
        ));
        assert!(KeywordVocabulary::from_json(r#"{"fever":["a"],"cough":["b"],"breathlessness":["c"],"chest_discomfort":["d"],"rash":["e"]}"#).is_err());
    }

    #[test]
    fn score_is_auditable() {
        let s = analyze_transcript(
            "coughing and cough, phlegm, hot and chills",
            &KeywordVocabulary::default(),
        );
        assert_eq!(s.score, score_from_matches(&s.matched));
        // cough category: 3 occurrences, fever: 2
        assert!((s.score - (0.5 + 0.05 * 3.0)).abs() < 1e-15);
    }
}
