//! Offline multimodal pneumonia screening engine.
//!
//! Four evidence channels are reduced to bounded concern signals in `[0, 1]`
//! and combined by a transparent weighted operator:
//!
//! | channel            | module        | signal |
//! |--------------------|---------------|--------|
//! | questionnaire      | [`triage`]    | `sym`  |
//! | cough recording    | [`audio`] + [`gbdt`] | `cgh` |
//! | transcript text    | [`text`]      | `sp`   |
//! | radiograph model   | [`imaging`]   | `img`  |
//!
//! [`fusion`] combines whatever signals are present, assigns a risk band,
//! and supports weight-sensitivity inspection. [`report`] renders a fixed
//! template summary, [`metrics`] evaluates classifier outputs, and
//! [`encounter`] persists complete screening sessions to an append-only
//! journal.
//!
//! Nothing here is a diagnostic device. The outputs are screening
//! estimates built from heuristic weights.

pub mod audio;
pub mod encounter;
pub mod fusion;
pub mod gbdt;
pub mod imaging;
pub mod metrics;
pub mod report;
pub mod text;
pub mod triage;

pub use fusion::{FusionConfig, FusionResult, Modality, ModalitySignals};
pub use triage::{RiskBand, SymptomResponse, TriageResult};
