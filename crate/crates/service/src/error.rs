use axum::extract::multipart::MultipartError;
use axum::extract::rejection::{BytesRejection, JsonRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use datadesk_core::Error as CoreError;
use serde::{Deserialize, Serialize};
use serde_json::json;

/// Error body returned by every endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status: status.as_u16(),
            code: code.to_owned(),
            message: message.into(),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: serde_json::Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn unknown_dataset(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "unknown_dataset",
            format!("no dataset with id `{id}`"),
        )
        .with_detail(json!({ "id": id }))
    }

    pub fn payload_too_large(limit: usize) -> Self {
        Self::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "payload_too_large",
            format!("upload exceeds the limit of {limit} bytes"),
        )
        .with_detail(json!({ "limit": limit }))
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub fn status_code(&self) -> StatusCode {
        StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR)
    }
}

/// Every core error is a caller fault: bad data, a bad spec or a model the
/// data cannot support.
impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let detail = match &e {
            CoreError::RaggedRows {
                row,
                expected,
                found,
            } => Some(json!({ "row": row, "expected": expected, "found": found })),
            CoreError::UnknownColumn(c)
            | CoreError::DuplicateColumn(c)
            | CoreError::DuplicateSelection(c)
            | CoreError::NonNumericColumn(c)
            | CoreError::AllMissing(c) => Some(json!({ "column": c })),
            CoreError::GapInSeries(t)
            | CoreError::DuplicateTimestamp(t)
            | CoreError::MissingValueInSeries(t) => Some(json!({ "time": t })),
            CoreError::LagOutOfRange { lag, n } => Some(json!({ "lag": lag, "n": n })),
            CoreError::SeriesTooShort { needed, got }
            | CoreError::TooFewObservations { needed, got } => {
                Some(json!({ "needed": needed, "got": got }))
            }
            CoreError::HorizonOutOfRange(h) => Some(json!({ "horizon": h })),
            _ => None,
        };
        Self {
            status: StatusCode::UNPROCESSABLE_ENTITY.as_u16(),
            code: e.code().to_owned(),
            message: e.to_string(),
            detail,
        }
    }
}

impl From<std::io::Error> for ApiError {
    fn from(e: std::io::Error) -> Self {
        tracing::error!("storage error: {e}");
        Self::internal(format!("storage error: {e}"))
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::bad_request(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::bad_request(e.body_text())
    }
}

impl From<BytesRejection> for ApiError {
    fn from(e: BytesRejection) -> Self {
        if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
            Self::new(
                StatusCode::PAYLOAD_TOO_LARGE,
                "payload_too_large",
                e.body_text(),
            )
        } else {
            Self::bad_request(e.body_text())
        }
    }
}

impl From<MultipartError> for ApiError {
    fn from(e: MultipartError) -> Self {
        if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
            Self::new(
                StatusCode::PAYLOAD_TOO_LARGE,
                "payload_too_large",
                e.body_text(),
            )
        } else {
            Self::bad_request(e.body_text())
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status_code(), Json(self)).into_response()
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ApiError {}
