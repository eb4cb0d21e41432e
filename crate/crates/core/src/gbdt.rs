//! Additive decision-tree ensemble inference with a logistic link.
//!
//! Model files are JSON:
//!
//! ```json
//! { "feature_count": 126, "feature_names": ["mfcc_mean_0", ...],
//!   "base_score": 0.0, "link": "logistic",
//!   "trees": [ { "nodes": [ {"feature": 3, "threshold": 0.5, "left": 1, "right": 2},
//!                           {"leaf": -0.2}, {"leaf": 0.4} ] } ],
//!   "training_info": { ... } }
//! ```
//!
//! Node 0 is the root of each tree. A sample goes left iff
//! `z[feature] < threshold`; ties go right. Converters from exporters that
//! send ties left (`<=`) should replace each threshold `t` with
//! [`threshold_for_le_split`]`(t)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::wav::ingest_wav;
use crate::audio::{feature_names, AcousticFeatureVector, AudioConfig, AudioError, FeatureExtractor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GbdtError {
    #[error("model does not match the feature schema: {0}")]
    SchemaMismatch(String),
    #[error("malformed model: {0}")]
    MalformedModel(String),
    #[error("feature vector has {found} entries, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("feature {index} ({name}) is not finite")]
    NonFiniteFeature { index: usize, name: String },
    #[error("recording has no segments")]
    EmptyRecording,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        leaf: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    /// Leaf value reached by `z`. Assumes the tree was validated.
    pub fn predict(&self, z: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { leaf } => return *leaf,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if z[*feature] < *threshold { *left } else { *right };
                }
            }
        }
    }

    fn validate(&self, tree_idx: usize, feature_count: usize) -> Result<(), GbdtError> {
        let bad = |msg: String| GbdtError::MalformedModel(format!("tree {tree_idx}: {msg}"));
        if self.nodes.is_empty() {
            return Err(bad("no nodes".into()));
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if seen[i] {
                return Err(bad(format!("node {i} reached twice (cycle or shared child)")));
            }
            seen[i] = true;
            match &self.nodes[i] {
                TreeNode::Leaf { leaf } => {
                    if !leaf.is_finite() {
                        return Err(bad(format!("node {i} has a non-finite leaf")));
                    }
                }
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= feature_count {
                        return Err(bad(format!(
                            "node {i} splits on feature {feature}, model has {feature_count}"
                        )));
                    }
                    if !threshold.is_finite() {
                        return Err(bad(format!("node {i} has a non-finite threshold")));
                    }
                    for child in [*left, *right] {
                        if child >= self.nodes.len() {
                            return Err(bad(format!("node {i} points at missing node {child}")));
                        }
                        stack.push(child);
                    }
                }
            }
        }
        if let Some(orphan) = seen.iter().position(|s| !s) {
            return Err(bad(format!("node {orphan} is unreachable from the root")));
        }
        Ok(())
    }
}

/// Validated additive tree ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsembleModel {
    pub feature_count: usize,
    pub feature_names: Vec<String>,
    pub base_score: f64,
    pub link: Link,
    pub trees: Vec<Tree>,
    /// Opaque training metadata, preserved verbatim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_info: Option<serde_json::Value>,
}

/// Threshold that makes `x < t'` equivalent to `x <= t`.
pub fn threshold_for_le_split(t: f64) -> f64 {
    t.next_up()
}

pub fn sigmoid(raw: f64) -> f64 {
    1.0 / (1.0 + (-raw).exp())
}

impl TreeEnsembleModel {
    /// Parse and validate against the default extractor schema.
    pub fn from_json(bytes: &[u8]) -> Result<Self, GbdtError> {
        Self::from_json_with_schema(bytes, &feature_names(AudioConfig::default().n_mfcc))
    }

    pub fn from_json_with_schema(bytes: &[u8], schema: &[String]) -> Result<Self, GbdtError> {
        let model: Self = serde_json::from_slice(bytes)
            .map_err(|e| GbdtError::MalformedModel(format!("invalid model JSON: {e}")))?;
        model.validate(schema)?;
        Ok(model)
    }

    pub fn validate(&self, schema: &[String]) -> Result<(), GbdtError> {
        if self.feature_count != schema.len() {
            return Err(GbdtError::SchemaMismatch(format!(
                "feature_count {} but the extractor produces {}",
                self.feature_count,
                schema.len()
            )));
        }
        if self.feature_names.len() != schema.len() {
            return Err(GbdtError::SchemaMismatch(format!(
                "{} feature names listed, expected {}",
                self.feature_names.len(),
                schema.len()
            )));
        }
        if let Some(i) = self.feature_names.iter().zip(schema).position(|(a, b)| a != b) {
            return Err(GbdtError::SchemaMismatch(format!(
                "feature {i} is named {:?}, extractor calls it {:?}",
                self.feature_names[i], schema[i]
            )));
        }
        if !self.base_score.is_finite() {
            return Err(GbdtError::MalformedModel("base_score is not finite".into()));
        }
        for (i, tree) in self.trees.iter().enumerate() {
            tree.validate(i, self.feature_count)?;
        }
        Ok(())
    }

    fn check_input(&self, z: &[f64]) -> Result<(), GbdtError> {
        if z.len() != self.feature_count {
            return Err(GbdtError::DimensionMismatch {
                expected: self.feature_count,
                found: z.len(),
            });
        }
        if let Some(index) = z.iter().position(|v| !v.is_finite()) {
            return Err(GbdtError::NonFiniteFeature {
                index,
                name: self.feature_names[index].clone(),
            });
        }
        Ok(())
    }

    /// Raw additive margin `base_score + sum of leaves`.
    ///
    /// Leaves are added in ascending order so the rounding, and hence the
    /// score, does not depend on the order trees appear in the file.
    pub fn margin(&self, z: &[f64]) -> Result<f64, GbdtError> {
        self.check_input(z)?;
        let mut leaves: Vec<f64> = self.trees.iter().map(|t| t.predict(z)).collect();
        leaves.sort_by(f64::total_cmp);
        Ok(self.base_score + leaves.iter().sum::<f64>())
    }

    /// Positive-class probability.
    pub fn score(&self, z: &AcousticFeatureVector) -> Result<f64, GbdtError> {
        self.score_values(&z.values)
    }

    pub fn score_values(&self, z: &[f64]) -> Result<f64, GbdtError> {
        let raw = self.margin(z)?;
        Ok(match self.link {
            Link::Logistic => sigmoid(raw),
        })
    }

    pub fn score_recording(
        &self,
        segments: &[AcousticFeatureVector],
        aggregation: Aggregation,
    ) -> Result<CoughScore, GbdtError> {
        if segments.is_empty() {
            return Err(GbdtError::EmptyRecording);
        }
        let per_segment = segments
            .iter()
            .map(|s| self.score(s))
            .collect::<Result<Vec<_>, _>>()?;
        let recording_level = aggregation.apply(&per_segment);
        Ok(CoughScore {
            per_segment,
            recording_level,
        })
    }
}

/// How per-segment probabilities become one recording-level signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Mean,
    Max,
}

impl Aggregation {
    fn apply(self, values: &[f64]) -> f64 {
        match self {
            Aggregation::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Aggregation::Max => values.iter().copied().fold(f64::MIN, f64::max),
        }
    }
}

impl std::str::FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "max" => Ok(Aggregation::Max),
            other => Err(format!("unknown aggregation {other:?} (expected mean or max)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoughScore {
    pub per_segment: Vec<f64>,
    pub recording_level: f64,
}

/// Hand-written three-tree model with made-up splits, for demos and
/// tests only. It has never seen data.
pub const DEMO_MODEL_JSON: &str = include_str!("../data/demo_cough_model.json");

pub fn load_model(bytes: &[u8]) -> Result<TreeEnsembleModel, GbdtError> {
    TreeEnsembleModel::from_json(bytes)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoughError {
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Model(#[from] GbdtError),
}

/// WAV bytes to recording-level cough score: ingest, segment, extract,
/// score each segment, aggregate.
pub fn score_wav(
    wav: &[u8],
    model: &TreeEnsembleModel,
    extractor: &FeatureExtractor,
    aggregation: Aggregation,
) -> Result<CoughScore, CoughError> {
    let waveform = ingest_wav(wav)?;
    let vectors = extractor.extract_recording(&waveform)?;
    Ok(model.score_recording(&vectors, aggregation)?)
}
