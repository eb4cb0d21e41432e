//! Screening encounters and their append-only store.
//!
//! An [`EncounterDraft`] accumulates evidence from any subset of the four
//! channels. Finalizing it fuses the signals, renders the report and yields
//! an immutable [`EncounterRecord`]. Records are appended to a
//! newline-delimited JSON [`Journal`]; raw WAV bytes go to a blob directory
//! keyed by their SHA-256 digest.
//!
//! Each record is written with a single `write_all` of the line and its
//! newline, then synced. A crash mid-write leaves at most one trailing line
//! without a newline, which [`Journal::open`] discards.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use thiserror::Error;

use crate::fusion::{fuse, FusionConfig, FusionError, FusionResult, Modality, ModalitySignals};
use crate::gbdt::CoughScore;
use crate::imaging::ImageSignal;
use crate::report::render_report;
use crate::text::{analyze_transcript, KeywordVocabulary, SpeechSignal};
use crate::triage::{evaluate_triage, SymptomResponse, TriageError, TriageResult};

pub const JOURNAL_FILE: &str = "encounters.ndjson";
pub const BLOB_DIR: &str = "blobs";

#[derive(Debug, Error)]
pub enum EncounterError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("journal line {line} is corrupt: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("encounter {0} already exists")]
    Duplicate(String),
    #[error("stored record {id} does not match recomputation: {reason}")]
    Inconsistent { id: String, reason: String },
    #[error("invalid blob digest {0:?}")]
    BadDigest(String),
}

/// Lowercase hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncounterStatus {
    Draft,
    Final,
}

/// Raw payloads, or references to them, as received.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EncounterInputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symptoms: Option<SymptomResponse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wav_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_signal: Option<ImageSignal>,
}

/// Per-channel outputs derived from the inputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EncounterEvidence {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triage: Option<TriageResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cough: Option<CoughScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speech: Option<SpeechSignal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncounterDraft {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub status: EncounterStatus,
    pub inputs: EncounterInputs,
    pub evidence: EncounterEvidence,
    pub signals: ModalitySignals,
}

impl Default for EncounterDraft {
    fn default() -> Self {
        Self::new()
    }
}

impl EncounterDraft {
    pub fn new() -> Self {
        Self {
            id: uuid::Uuid::new_v4().to_string(),
            created_at: Utc::now(),
            status: EncounterStatus::Draft,
            inputs: EncounterInputs::default(),
            evidence: EncounterEvidence::default(),
            signals: ModalitySignals::default(),
        }
    }

    /// Evaluate the questionnaire; sets `sym` to the normalized score and
    /// raises the urgent flag when an escalation rule fires.
    pub fn add_symptoms(&mut self, response: SymptomResponse) -> Result<&TriageResult, TriageError> {
        let result = evaluate_triage(&response)?;
        self.signals.sym = Some(result.normalized);
        self.signals.urgent |= result.is_urgent();
        self.inputs.symptoms = Some(response);
        Ok(self.evidence.triage.insert(result))
    }

    pub fn add_cough(&mut self, wav_digest: impl Into<String>, score: CoughScore) {
        self.signals.cgh = Some(score.recording_level);
        self.inputs.wav_digest = Some(wav_digest.into());
        self.evidence.cough = Some(score);
    }

    pub fn add_transcript(&mut self, text: &str, vocab: &KeywordVocabulary) -> &SpeechSignal {
        let signal = analyze_transcript(text, vocab);
        self.signals.sp = Some(signal.score);
        self.inputs.transcript = Some(text.to_owned());
        self.evidence.speech.insert(signal)
    }

    pub fn add_image_signal(&mut self, signal: ImageSignal) {
        self.signals.img = Some(signal.probability);
        self.inputs.image_signal = Some(signal);
    }

    /// Directly supplied signal values; present values replace existing ones.
    pub fn merge_signals(&mut self, signals: &ModalitySignals) {
        self.signals = signals.merged_over(&self.signals);
    }

    pub fn finalize(self, config: &FusionConfig) -> Result<EncounterRecord, FusionError> {
        let fusion = fuse(&self.signals, config)?;
        let report = render_report(
            self.evidence.triage.as_ref(),
            self.evidence.cough.as_ref(),
            self.evidence.speech.as_ref(),
            self.inputs.image_signal.as_ref(),
            &fusion,
        );
        Ok(EncounterRecord {
            id: self.id,
            created_at: self.created_at,
            finalized_at: Utc::now(),
            status: EncounterStatus::Final,
            inputs: self.inputs,
            evidence: self.evidence,
            signals: self.signals,
            config_digest: config.digest(),
            config: config.clone(),
            fusion,
            report,
        })
    }
}

/// A finalized encounter. Never modified after it is written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncounterRecord {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub finalized_at: DateTime<Utc>,
    pub status: EncounterStatus,
    pub inputs: EncounterInputs,
    pub evidence: EncounterEvidence,
    pub signals: ModalitySignals,
    pub config: FusionConfig,
    pub config_digest: String,
    pub fusion: FusionResult,
    pub report: String,
}

impl EncounterRecord {
    /// Modalities that were supplied, in report order.
    pub fn supplied(&self) -> Vec<Modality> {
        crate::report::DISPLAY_ORDER
            .into_iter()
            .filter(|m| self.signals.get(*m).is_some())
            .collect()
    }

    /// Recompute fusion from the stored signals and config and require an
    /// exact match, including the config digest.
    pub fn verify(&self) -> Result<(), EncounterError> {
        let bad = |reason: String| EncounterError::Inconsistent {
            id: self.id.clone(),
            reason,
        };
        if self.config.digest() != self.config_digest {
            return Err(bad("config digest".into()));
        }
        let again = fuse(&self.signals, &self.config).map_err(|e| bad(e.to_string()))?;
        if again != self.fusion {
            return Err(bad(format!("fused score {} vs stored {}", again.score, self.fusion.score)));
        }
        Ok(())
    }
}

struct JournalState {
    file: File,
    records: Vec<EncounterRecord>,
    by_id: HashMap<String, usize>,
}

/// Newline-delimited JSON journal of finalized encounters plus a blob
/// directory. One writer at a time; reads see every completed append.
pub struct Journal {
    dir: PathBuf,
    state: Mutex<JournalState>,
}

impl Journal {
    /// Open or create the store under `dir`, replaying existing records.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, EncounterError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(dir.join(BLOB_DIR))?;
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(dir.join(JOURNAL_FILE))?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;

        let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        if complete < bytes.len() {
            // interrupted append: drop the unterminated tail
            file.set_len(complete as u64)?;
            file.sync_all()?;
        }
        file.seek(SeekFrom::End(0))?;

        let mut records = Vec::new();
        let mut by_id = HashMap::new();
        for (i, line) in bytes[..complete].split(|&b| b == b'\n').enumerate() {
            if line.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let rec: EncounterRecord = serde_json::from_slice(line).map_err(|e| EncounterError::Corrupt {
                line: i + 1,
                reason: e.to_string(),
            })?;
            if by_id.insert(rec.id.clone(), records.len()).is_some() {
                return Err(EncounterError::Corrupt {
                    line: i + 1,
                    reason: format!("duplicate id {}", rec.id),
                });
            }
            records.push(rec);
        }
        Ok(Self {
            dir,
            state: Mutex::new(JournalState { file, records, by_id }),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, JournalState> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn append(&self, record: &EncounterRecord) -> Result<(), EncounterError> {
        let mut line = serde_json::to_vec(record).expect("record serializes");
        line.push(b'\n');
        let mut st = self.lock();
        if st.by_id.contains_key(&record.id) {
            return Err(EncounterError::Duplicate(record.id.clone()));
        }
        st.file.write_all(&line)?;
        st.file.flush()?;
        st.file.sync_data()?;
        let idx = st.records.len();
        st.by_id.insert(record.id.clone(), idx);
        st.records.push(record.clone());
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<EncounterRecord> {
        let st = self.lock();
        st.by_id.get(id).map(|&i| st.records[i].clone())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.lock().by_id.contains_key(id)
    }

    /// All records in append order.
    pub fn list(&self) -> Vec<EncounterRecord> {
        self.lock().records.clone()
    }

    pub fn len(&self) -> usize {
        self.lock().records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn blob_path(&self, digest: &str) -> Result<PathBuf, EncounterError> {
        if digest.len() != 64 || !digest.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase()) {
            return Err(EncounterError::BadDigest(digest.to_owned()));
        }
        Ok(self.dir.join(BLOB_DIR).join(digest))
    }

    /// Store bytes under their digest (write to a temp name, then rename).
    pub fn put_blob(&self, bytes: &[u8]) -> Result<String, EncounterError> {
        let digest = sha256_hex(bytes);
        let path = self.blob_path(&digest)?;
        if !path.exists() {
            let tmp = self
                .dir
                .join(BLOB_DIR)
                .join(format!(".{digest}.{}.tmp", uuid::Uuid::new_v4()));
            let mut f = File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, &path)?;
        }
        Ok(digest)
    }

    pub fn get_blob(&self, digest: &str) -> Result<Option<Vec<u8>>, EncounterError> {
        match fs::read(self.blob_path(digest)?) {
            Ok(b) => Ok(Some(b)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }
}
