//! Router, shared state and handlers.
//!
//! Every channel endpoint takes an optional `encounter_id` query parameter.
//! Without it the endpoint is a pure computation. With it the result is
//! also recorded on that draft encounter. `POST /fuse` finalizes a draft
//! (or a fresh one) and appends it to the journal; afterwards the
//! encounter rejects changes with 409.

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pneumo_core::audio::FeatureExtractor;
use pneumo_core::encounter::{EncounterDraft, EncounterRecord, Journal};
use pneumo_core::fusion::{fuse, sweep_configs, FusionConfig, FusionResult, ModalitySignals, SweepRow};
use pneumo_core::gbdt::{score_wav, CoughScore, TreeEnsembleModel};
use pneumo_core::imaging::ingest_image_signal;
use pneumo_core::report::render_report;
use pneumo_core::text::{analyze_transcript, KeywordVocabulary};
use pneumo_core::triage::{evaluate_triage, SymptomResponse};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};

use crate::config::ServiceConfig;
use crate::error::{parse_json, ApiError};

const MAX_BODY_BYTES: usize = 64 * 1024 * 1024;

pub struct AppState {
    pub config: ServiceConfig,
    pub fusion: FusionConfig,
    model: Option<TreeEnsembleModel>,
    extractor: FeatureExtractor,
    vocabulary: KeywordVocabulary,
    journal: Journal,
    drafts: Mutex<HashMap<String, EncounterDraft>>,
}

impl AppState {
    /// Load the model, vocabulary and journal named by `config`. A model
    /// path that fails to load is a startup error; no model path means
    /// `/cough` answers 503.
    pub fn new(config: ServiceConfig) -> anyhow::Result<Self> {
        let fusion = config.fusion()?;
        let extractor = FeatureExtractor::default();
        let model = match &config.model {
            Some(path) => {
                let bytes = std::fs::read(path)
                    .map_err(|e| anyhow::anyhow!("reading model {}: {e}", path.display()))?;
                Some(
                    TreeEnsembleModel::from_json_with_schema(&bytes, extractor.names())
                        .map_err(|e| anyhow::anyhow!("model {}: {e}", path.display()))?,
                )
            }
            None => None,
        };
        let vocabulary = match &config.vocabulary {
            Some(path) => KeywordVocabulary::from_json(&std::fs::read_to_string(path)?)?,
            None => KeywordVocabulary::default(),
        };
        let journal = Journal::open(&config.data_dir)?;
        Ok(Self {
            config,
            fusion,
            model,
            extractor,
            vocabulary,
            journal,
            drafts: Mutex::new(HashMap::new()),
        })
    }

    pub fn journal(&self) -> &Journal {
        &self.journal
    }

    fn drafts(&self) -> MutexGuard<'_, HashMap<String, EncounterDraft>> {
        self.drafts.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn missing(&self, id: &str) -> ApiError {
        if self.journal.contains(id) {
            ApiError::finalized(id)
        } else {
            ApiError::not_found(id)
        }
    }

    /// Apply `f` to a draft under the draft lock.
    fn with_draft<R>(
        &self,
        id: &str,
        f: impl FnOnce(&mut EncounterDraft) -> Result<R, ApiError>,
    ) -> Result<R, ApiError> {
        let mut drafts = self.drafts();
        match drafts.get_mut(id) {
            Some(d) => f(d),
            None => Err(self.missing(id)),
        }
    }

    /// Fail early with 404/409 before doing expensive work.
    fn check_draft(&self, id: Option<&str>) -> Result<(), ApiError> {
        match id {
            Some(id) if !self.drafts().contains_key(id) => Err(self.missing(id)),
            _ => Ok(()),
        }
    }

    fn finalize(
        &self,
        id: Option<&str>,
        signals: &ModalitySignals,
        cfg: &FusionConfig,
    ) -> Result<EncounterRecord, ApiError> {
        let mut drafts = self.drafts();
        let mut draft = match id {
            Some(id) => drafts.get(id).cloned().ok_or_else(|| self.missing(id))?,
            None => EncounterDraft::new(),
        };
        draft.merge_signals(signals);
        let record = draft.finalize(cfg)?;
        self.journal.append(&record)?;
        if let Some(id) = id {
            drafts.remove(id);
        }
        Ok(record)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/config", get(get_config))
        .route("/triage", post(triage))
        .route("/cough", post(cough))
        .route("/transcript", post(transcript))
        .route("/image-signal", post(image_signal))
        .route("/fuse", post(fuse_handler))
        .route("/encounters", get(list_encounters).post(create_encounter))
        .route("/encounters/{id}", get(get_encounter))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(state)
}

#[derive(Debug, Default, Deserialize)]
pub struct EncounterQuery {
    pub encounter_id: Option<String>,
}

/// A channel result, tagged with the encounter it was recorded on.
#[derive(Serialize)]
struct Tagged<T: Serialize> {
    #[serde(flatten)]
    result: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    encounter_id: Option<String>,
}

fn tagged<T: Serialize>(result: T, id: Option<String>) -> Json<Tagged<T>> {
    Json(Tagged {
        result,
        encounter_id: id,
    })
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({"status": "ok"}))
}

async fn get_config(State(st): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let model = match &st.model {
        Some(m) => json!({
            "loaded": true,
            "feature_count": m.feature_count,
            "trees": m.trees.len(),
            "training_info": m.training_info,
        }),
        None => json!({"loaded": false, "reason": "no_model_configured"}),
    };
    Json(json!({
        "fusion": st.fusion,
        "presets": FusionConfig::presets(),
        "aggregation": st.config.aggregation,
        "model": model,
        "audio": st.extractor.config(),
        "feature_names": st.extractor.names(),
        "vocabulary": st.vocabulary,
    }))
}

async fn triage(
    State(st): State<Arc<AppState>>,
    Query(q): Query<EncounterQuery>,
    body: Bytes,
) -> Result<Response, ApiError> {
    st.check_draft(q.encounter_id.as_deref())?;
    let response: SymptomResponse = parse_json(&body)?;
    let result = match &q.encounter_id {
        Some(id) => st.with_draft(id, |d| Ok(d.add_symptoms(response)?.clone()))?,
        None => evaluate_triage(&response)?,
    };
    Ok(tagged(result, q.encounter_id).into_response())
}

/// Raw WAV body, or the first file part of a multipart form.
async fn wav_bytes(req: Request) -> Result<Bytes, ApiError> {
    let is_multipart = req
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"));
    let bad = |m: String| ApiError::new(StatusCode::BAD_REQUEST, "bad_upload", m);
    if !is_multipart {
        return Bytes::from_request(req, &()).await.map_err(|e| bad(e.body_text()));
    }
    let mut form = Multipart::from_request(req, &()).await.map_err(|e| bad(e.body_text()))?;
    while let Some(field) = form.next_field().await.map_err(|e| bad(e.body_text()))? {
        if field.file_name().is_some() || matches!(field.name(), Some("file" | "audio" | "wav")) {
            return field.bytes().await.map_err(|e| bad(e.body_text()));
        }
    }
    Err(bad("multipart form has no file part".into()))
}

async fn cough(
    State(st): State<Arc<AppState>>,
    Query(q): Query<EncounterQuery>,
    req: Request,
) -> Result<Response, ApiError> {
    if st.model.is_none() {
        return Err(ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "no_model_configured",
            "no cough model is loaded; start the service with a model path",
        ));
    }
    st.check_draft(q.encounter_id.as_deref())?;
    let wav = wav_bytes(req).await?;
    let worker = Arc::clone(&st);
    let scored = tokio::task::spawn_blocking(move || -> Result<(CoughScore, Bytes), ApiError> {
        let model = worker.model.as_ref().expect("checked above");
        let score = score_wav(&wav, model, &worker.extractor, worker.config.aggregation)?;
        Ok((score, wav))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "worker_failed", e.to_string()))??;
    let (score, wav) = scored;

    if let Some(id) = &q.encounter_id {
        let digest = st.journal.put_blob(&wav)?;
        st.with_draft(id, |d| {
            d.add_cough(digest, score.clone());
            Ok(())
        })?;
    }
    Ok(tagged(score, q.encounter_id).into_response())
}

#[derive(Deserialize)]
struct TranscriptBody {
    text: String,
}

async fn transcript(
    State(st): State<Arc<AppState>>,
    Query(q): Query<EncounterQuery>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    st.check_draft(q.encounter_id.as_deref())?;
    let plain = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("text/plain"));
    let text = if plain {
        String::from_utf8(body.to_vec())
            .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "invalid_utf8", "transcript is not UTF-8"))?
    } else {
        parse_json::<TranscriptBody>(&body)?.text
    };
    let signal = match &q.encounter_id {
        Some(id) => st.with_draft(id, |d| Ok(d.add_transcript(&text, &st.vocabulary).clone()))?,
        None => analyze_transcript(&text, &st.vocabulary),
    };
    Ok(tagged(signal, q.encounter_id).into_response())
}

async fn image_signal(
    State(st): State<Arc<AppState>>,
    Query(q): Query<EncounterQuery>,
    body: Bytes,
) -> Result<Response, ApiError> {
    st.check_draft(q.encounter_id.as_deref())?;
    let record: serde_json::Value = parse_json(&body)?;
    let signal = ingest_image_signal(&record)?;
    if let Some(id) = &q.encounter_id {
        st.with_draft(id, |d| {
            d.add_image_signal(signal.clone());
            Ok(())
        })?;
    }
    Ok(tagged(signal, q.encounter_id).into_response())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuseRequest {
    #[serde(default)]
    pub signals: ModalitySignals,
    #[serde(default)]
    pub encounter_id: Option<String>,
    /// Full config; takes precedence over `preset`.
    #[serde(default)]
    pub config: Option<FusionConfig>,
    #[serde(default)]
    pub preset: Option<String>,
    /// Also evaluate the signals under every built-in preset.
    #[serde(default)]
    pub sweep: bool,
    /// Compute without creating or finalizing an encounter.
    #[serde(default)]
    pub dry_run: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FuseResponse {
    pub persisted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub encounter: Option<EncounterRecord>,
    pub fusion: FusionResult,
    pub report: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepRow>>,
}

async fn fuse_handler(
    State(st): State<Arc<AppState>>,
    Query(q): Query<EncounterQuery>,
    body: Bytes,
) -> Result<Response, ApiError> {
    st.check_draft(q.encounter_id.as_deref())?;
    let req: FuseRequest = if body.iter().all(u8::is_ascii_whitespace) {
        FuseRequest::default()
    } else {
        parse_json(&body)?
    };
    let id = q.encounter_id.or(req.encounter_id);
    let cfg = match (req.config, &req.preset) {
        (Some(c), _) => {
            c.validate()?;
            c
        }
        (None, Some(name)) => FusionConfig::preset_named(name)
            .ok_or_else(|| ApiError::unprocessable("unknown_preset", format!("no preset named {name:?}")))?,
        (None, None) => st.fusion.clone(),
    };

    let (persisted, encounter, fusion, report, signals) = if req.dry_run {
        let draft = match &id {
            Some(id) => st.with_draft(id, |d| Ok(d.clone()))?,
            None => EncounterDraft::new(),
        };
        let signals = req.signals.merged_over(&draft.signals);
        let fusion = fuse(&signals, &cfg)?;
        let report = render_report(
            draft.evidence.triage.as_ref(),
            draft.evidence.cough.as_ref(),
            draft.evidence.speech.as_ref(),
            draft.inputs.image_signal.as_ref(),
            &fusion,
        );
        (false, None, fusion, report, signals)
    } else {
        let worker = Arc::clone(&st);
        let signals = req.signals;
        let record = tokio::task::spawn_blocking(move || worker.finalize(id.as_deref(), &signals, &cfg))
            .await
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "worker_failed", e.to_string()))??;
        let (fusion, report, signals) = (record.fusion.clone(), record.report.clone(), record.signals);
        (true, Some(record), fusion, report, signals)
    };
    let sweep = if req.sweep {
        Some(sweep_configs(&signals, &FusionConfig::presets())?)
    } else {
        None
    };
    let status = if persisted { StatusCode::CREATED } else { StatusCode::OK };
    let body = FuseResponse {
        persisted,
        encounter,
        fusion,
        report,
        sweep,
    };
    Ok((status, Json(body)).into_response())
}

async fn create_encounter(State(st): State<Arc<AppState>>) -> Response {
    let draft = EncounterDraft::new();
    st.drafts().insert(draft.id.clone(), draft.clone());
    (StatusCode::CREATED, Json(draft)).into_response()
}

async fn get_encounter(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    if let Some(d) = st.drafts().get(&id) {
        return Ok(Json(d.clone()).into_response());
    }
    match st.journal.get(&id) {
        Some(r) => Ok(Json(r).into_response()),
        None => Err(ApiError::not_found(&id)),
    }
}

/// Finalized encounters in append order.
async fn list_encounters(State(st): State<Arc<AppState>>) -> Json<Vec<EncounterRecord>> {
    Json(st.journal.list())
}

/// Bind and serve until the listener fails or ctrl-c arrives.
pub async fn serve(state: Arc<AppState>) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(&state.config.bind).await?;
    eprintln!("pneumo: listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
