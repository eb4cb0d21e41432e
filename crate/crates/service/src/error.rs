//! HTTP error mapping. Every error body is
//! `{"error": "<machine code>", "message": "<human text>"}`.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use pneumo_core::audio::AudioError;
use pneumo_core::encounter::EncounterError;
use pneumo_core::fusion::FusionError;
use pneumo_core::gbdt::{CoughError, GbdtError};
use pneumo_core::imaging::ImagingError;
use pneumo_core::triage::TriageError;
use serde::de::DeserializeOwned;
use serde_json::json;

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn unprocessable(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "encounter_not_found", format!("no encounter {id}"))
    }

    pub fn finalized(id: &str) -> Self {
        Self::new(
            StatusCode::CONFLICT,
            "encounter_finalized",
            format!("encounter {id} is finalized and cannot change"),
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.code, "message": self.message}))).into_response()
    }
}

/// Syntax errors are 400; well-formed JSON of the wrong shape is 422.
pub fn parse_json<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| {
        // serde_json reports some shape errors (a number where an enum is
        // expected) as syntax errors, so ask whether the body parses at all.
        if serde_json::from_slice::<serde::de::IgnoredAny>(body).is_ok() {
            ApiError::unprocessable("invalid_payload", e.to_string())
        } else {
            ApiError::new(StatusCode::BAD_REQUEST, "malformed_json", e.to_string())
        }
    })
}

impl From<TriageError> for ApiError {
    fn from(e: TriageError) -> Self {
        ApiError::unprocessable("invalid_response", e.to_string())
    }
}

impl From<FusionError> for ApiError {
    fn from(e: FusionError) -> Self {
        let code = match &e {
            FusionError::NoSignals => "no_signals",
            FusionError::InvalidConfig(_) => "invalid_config",
            FusionError::SignalOutOfRange { .. } => "signal_out_of_range",
            FusionError::MissingModality(_) => "missing_modality",
            FusionError::NegativeWeight { .. } => "negative_weight",
            FusionError::InvalidShift(_) => "invalid_shift",
        };
        ApiError::unprocessable(code, e.to_string())
    }
}

impl From<AudioError> for ApiError {
    fn from(e: AudioError) -> Self {
        let code = match &e {
            AudioError::UnsupportedFormat(_) => "unsupported_format",
            AudioError::CorruptHeader(_) => "corrupt_header",
            AudioError::TooShort { .. } => "too_short",
            AudioError::TooFewFrames(_) => "too_few_frames",
            AudioError::InvalidWaveform(_) => "invalid_waveform",
        };
        ApiError::unprocessable(code, e.to_string())
    }
}

impl From<CoughError> for ApiError {
    fn from(e: CoughError) -> Self {
        match e {
            CoughError::Audio(a) => a.into(),
            CoughError::Model(GbdtError::NonFiniteFeature { .. }) => {
                ApiError::unprocessable("non_finite_feature", e.to_string())
            }
            CoughError::Model(m) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "model_error", m.to_string()),
        }
    }
}

impl From<ImagingError> for ApiError {
    fn from(e: ImagingError) -> Self {
        let code = match &e {
            ImagingError::OutOfRange(_) => "probability_out_of_range",
            _ => "invalid_image_signal",
        };
        ApiError::unprocessable(code, e.to_string())
    }
}

impl From<EncounterError> for ApiError {
    fn from(e: EncounterError) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_error", e.to_string())
    }
}
