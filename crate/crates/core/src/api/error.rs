use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use crate::explore::ExploreError;
use crate::narrative::NarrativeError;
use crate::schema::SchemaError;
use crate::store::StoreError;

/// Wire error body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }

    pub fn malformed_body(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "malformed_body", message)
    }

    pub fn invalid(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }

    pub fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn unknown_costume(id: &str) -> Self {
        Self::not_found("unknown_costume", format!("unknown costume `{id}`"))
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody { code: self.code.to_string(), message: self.message.clone() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body())).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownCostume(id) => ApiError::unknown_costume(&id),
            StoreError::EmptyUserId => ApiError::invalid("invalid_request", e.to_string()),
            StoreError::DuplicateId(_) => ApiError::new(StatusCode::CONFLICT, "duplicate_id", e.to_string()),
            StoreError::LockHeld(_) => ApiError::new(StatusCode::CONFLICT, "lock_held", e.to_string()),
            other => {
                tracing::error!(error = %other, "storage failure");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_error", other.to_string())
            }
        }
    }
}

impl From<ExploreError> for ApiError {
    fn from(e: ExploreError) -> Self {
        match e {
            ExploreError::UnknownId(id) => ApiError::unknown_costume(&id),
            ExploreError::EmptyQuery => ApiError::invalid("empty_query", e.to_string()),
            ExploreError::InvalidPage | ExploreError::InvalidPageSize(_) => {
                ApiError::invalid("invalid_page", e.to_string())
            }
            ExploreError::DuplicateId(_) => ApiError::new(StatusCode::CONFLICT, "duplicate_id", e.to_string()),
        }
    }
}

impl From<NarrativeError> for ApiError {
    fn from(e: NarrativeError) -> Self {
        ApiError::from(&e)
    }
}

impl From<&NarrativeError> for ApiError {
    fn from(e: &NarrativeError) -> Self {
        let message = e.to_string();
        match e {
            NarrativeError::UnknownTheme(_) => ApiError::invalid("invalid_request", message),
            NarrativeError::IdMismatch { .. } => ApiError::invalid("invalid_request", message),
            NarrativeError::ThemeUnavailable { .. } => ApiError::invalid("theme_unavailable", message),
            NarrativeError::NoteTooLong(_) => ApiError::invalid("note_too_long", message),
            NarrativeError::Template(_) => ApiError::invalid("template_error", message),
            NarrativeError::UnknownProvider(_) => ApiError::invalid("unknown_provider", message),
            NarrativeError::ProviderTimeout { .. } => {
                ApiError::new(StatusCode::GATEWAY_TIMEOUT, "provider_timeout", message)
            }
            NarrativeError::ProviderRefusal(_) => ApiError::new(StatusCode::BAD_GATEWAY, "provider_refusal", message),
            NarrativeError::ProviderProtocol(_) => ApiError::new(StatusCode::BAD_GATEWAY, "provider_error", message),
        }
    }
}

impl From<SchemaError> for ApiError {
    fn from(e: SchemaError) -> Self {
        match e {
            SchemaError::UnknownCategory(_) => ApiError::not_found("unknown_category", e.to_string()),
            SchemaError::UnknownTag(_) | SchemaError::UnknownValue { .. } => {
                ApiError::not_found("unknown_tag", e.to_string())
            }
            SchemaError::UnknownConcept(_) => ApiError::invalid("invalid_request", e.to_string()),
        }
    }
}

/// Parse a JSON body: syntax errors are 400, shape and value errors 422.
pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    // Syntax first, so a broken document never reports as a shape error.
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| ApiError::malformed_body(e.to_string()))?;
    serde_json::from_value(value).map_err(|e| ApiError::invalid("invalid_request", e.to_string()))
}

/// Parse a query string strictly; unknown parameters are rejected.
pub(crate) fn parse_query<T: serde::de::DeserializeOwned>(raw: Option<&str>) -> Result<T, ApiError> {
    serde_urlencoded::from_str(raw.unwrap_or("")).map_err(|e| ApiError::invalid("invalid_query", e.to_string()))
}
