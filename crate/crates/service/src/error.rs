use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use drawscaffold_core::Error as CoreError;
use thiserror::Error;

pub type ServiceResult<T> = std::result::Result<T, ServiceError>;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("session `{0}` not found")]
    SessionNotFound(String),

    #[error("session has no canvas snapshot")]
    NoCanvas,

    #[error("bad request: {0}")]
    BadRequest(String),

    #[error("request exceeded {0} s")]
    Timeout(u64),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl ServiceError {
    /// Stable machine-readable code sent in the `error` field.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Core(e) => match e {
                CoreError::BadImage(_) => "bad_image",
                CoreError::TooLarge { .. } => "too_large",
                CoreError::InvalidDimensions { .. } => "invalid_dimensions",
                CoreError::DimensionMismatch { .. } => "dimension_mismatch",
                CoreError::InvalidKernel(_) => "invalid_kernel",
                CoreError::EmptyMask => "empty_mask",
                CoreError::DegenerateResult { .. } => "degenerate_result",
                CoreError::DegeneratePolygon => "degenerate_polygon",
                CoreError::ZeroArea => "zero_area",
                CoreError::EmptyInput => "empty_input",
                CoreError::NoPoints => "no_points",
                CoreError::InvalidConfig(_) => "invalid_config",
                CoreError::AllPixelsFiltered => "all_pixels_filtered",
                CoreError::EmptyRegion => "empty_region",
                CoreError::OutOfBounds { .. } => "out_of_bounds",
                CoreError::ModeMismatch => "mode_mismatch",
                CoreError::EmptyPalette => "empty_palette",
                CoreError::ProviderUnavailable(_) => "provider_unavailable",
                CoreError::NoDetections => "no_detections",
                CoreError::InvalidRequest(_) => "invalid_request",
                CoreError::Io(_) => "io",
            },
            ServiceError::SessionNotFound(_) => "session_not_found",
            ServiceError::NoCanvas => "no_canvas",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::Timeout(_) => "timeout",
            ServiceError::Internal(_) => "internal",
            ServiceError::Config(_) => "config",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::Core(e) => match e {
                CoreError::BadImage(_)
                | CoreError::InvalidDimensions { .. }
                | CoreError::InvalidConfig(_)
                | CoreError::InvalidRequest(_) => StatusCode::BAD_REQUEST,
                CoreError::TooLarge { .. } => StatusCode::PAYLOAD_TOO_LARGE,
                CoreError::ProviderUnavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
                CoreError::Io(_) | CoreError::DimensionMismatch { .. } => StatusCode::INTERNAL_SERVER_ERROR,
                _ => StatusCode::UNPROCESSABLE_ENTITY,
            },
            ServiceError::SessionNotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::NoCanvas => StatusCode::CONFLICT,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Timeout(_) => StatusCode::GATEWAY_TIMEOUT,
            ServiceError::Internal(_) | ServiceError::Config(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            tracing::warn!(error = %self, "request failed");
        }
        let body = serde_json::json!({ "error": self.code(), "message": self.to_string() });
        (status, Json(body)).into_response()
    }
}
