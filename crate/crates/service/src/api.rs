//! `/v1` HTTP routes.
//!
//! JSON bodies are optional wherever every field has a default; an empty or
//! `null` body means "use the session config". Image bodies and responses are PNG.

use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use drawscaffold_core::geometry::NormPoint;
use drawscaffold_core::imagecore::{recolor_region, BlurFilter, BlurSpec, ImageBuffer, DEFAULT_RANGE_SIGMA};
use drawscaffold_core::palette::{isolate_color_preview_lab, ClusterMode, PaletteSource};
use drawscaffold_core::segmentation::{SegmentationProvider, SegmentationRequest};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{ServiceConfig, SessionConfig};
use crate::error::{ServiceError, ServiceResult};
use crate::pipeline::{self, CompositionReport, ContourBudget, FeedbackReport};
use crate::store::SessionStore;

const BODY_LIMIT: usize = 512 * 1024 * 1024;

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<SessionStore>,
    pub config: Arc<ServiceConfig>,
    pub provider: Arc<dyn SegmentationProvider>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> ServiceResult<Self> {
        let store = SessionStore::open(config.data_dir.clone())?;
        let provider: Arc<dyn SegmentationProvider> = Arc::from(config.provider.build());
        Ok(Self {
            store: Arc::new(store),
            config: Arc::new(config),
            provider,
        })
    }

    fn budget(&self) -> ContourBudget {
        ContourBudget {
            epsilon: self.config.contour_epsilon,
            max_contours: self.config.max_contours,
        }
    }

    /// Runs `f` on the blocking pool under the request timeout.
    async fn blocking<T, F>(&self, f: F) -> ServiceResult<T>
    where
        T: Send + 'static,
        F: FnOnce() -> ServiceResult<T> + Send + 'static,
    {
        let secs = self.config.request_timeout_secs;
        match tokio::time::timeout(Duration::from_secs(secs), tokio::task::spawn_blocking(f)).await {
            Ok(Ok(result)) => result,
            Ok(Err(join)) => Err(ServiceError::Internal(format!("worker failed: {join}"))),
            Err(_) => Err(ServiceError::Timeout(secs)),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/v1/config", get(service_config))
        .route("/v1/grids", get(grids))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", get(session_info).delete(delete_session))
        .route("/v1/sessions/{id}/config", get(get_config).put(put_config))
        .route("/v1/sessions/{id}/reference", get(get_reference))
        .route("/v1/sessions/{id}/canvas", get(get_canvas).put(put_canvas))
        .route("/v1/sessions/{id}/composition", post(composition))
        .route("/v1/sessions/{id}/value-feedback", post(value_feedback))
        .route("/v1/sessions/{id}/color-feedback", post(color_feedback))
        .route("/v1/sessions/{id}/value-guidance", get(value_guidance))
        .route("/v1/sessions/{id}/isolation", get(isolation))
        .route("/v1/sessions/{id}/recolor", post(recolor))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

fn parse_body<T: DeserializeOwned + Default>(body: &Bytes) -> ServiceResult<T> {
    if body.trim_ascii().is_empty() || body.trim_ascii() == b"null" {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ServiceError::BadRequest(format!("invalid JSON body: {e}")))
}

fn png(img: &ImageBuffer) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], img.to_png_bytes()).into_response()
}

async fn service_config(State(app): State<AppState>) -> Json<ServiceConfig> {
    Json((*app.config).clone())
}

async fn grids() -> Json<Vec<pipeline::GridRecord>> {
    Json(pipeline::all_grids())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    pub width: u32,
    pub height: u32,
}

async fn create_session(State(app): State<AppState>, body: Bytes) -> ServiceResult<(StatusCode, Json<Created>)> {
    let limit = app.config.max_pixels;
    let defaults = app.config.defaults;
    let store = app.store.clone();
    let session = app
        .blocking(move || {
            let reference = ImageBuffer::from_png_bytes_limited(&body, limit)?;
            store.create(reference, defaults)
        })
        .await?;
    let info = session.info();
    tracing::info!(id = %info.id, width = info.width, height = info.height, "session created");
    Ok((
        StatusCode::CREATED,
        Json(Created {
            id: info.id,
            width: info.width,
            height: info.height,
        }),
    ))
}

async fn session_info(State(app): State<AppState>, Path(id): Path<String>) -> ServiceResult<Response> {
    Ok(Json(app.store.get(&id)?.info()).into_response())
}

async fn delete_session(State(app): State<AppState>, Path(id): Path<String>) -> ServiceResult<StatusCode> {
    app.store.delete(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn get_config(State(app): State<AppState>, Path(id): Path<String>) -> ServiceResult<Json<SessionConfig>> {
    Ok(Json(app.store.get(&id)?.read().config))
}

async fn put_config(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ServiceResult<Json<SessionConfig>> {
    let cfg: SessionConfig = parse_body(&body)?;
    cfg.validate()?;
    let session = app.store.get(&id)?;
    let store = app.store.clone();
    app.blocking(move || {
        let mut state = session.write();
        state.config = cfg;
        store.persist(&session, &state)?;
        Ok(Json(cfg))
    })
    .await
}

async fn get_reference(State(app): State<AppState>, Path(id): Path<String>) -> ServiceResult<Response> {
    let session = app.store.get(&id)?;
    app.blocking(move || Ok(png(&session.read().reference))).await
}

async fn get_canvas(State(app): State<AppState>, Path(id): Path<String>) -> ServiceResult<Response> {
    let session = app.store.get(&id)?;
    app.blocking(move || Ok(png(&session.read().canvas()?.image))).await
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CanvasAck {
    pub version: u64,
    pub width: u32,
    pub height: u32,
}

async fn put_canvas(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> ServiceResult<Json<CanvasAck>> {
    let session = app.store.get(&id)?;
    let limit = app.config.max_pixels;
    let store = app.store.clone();
    app.blocking(move || {
        let image = ImageBuffer::from_png_bytes_limited(&body, limit)?;
        let mut state = session.write();
        let version = session.set_canvas(&mut state, image)?;
        store.persist(&session, &state)?;
        let (width, height) = state.reference.dimensions();
        Ok(Json(CanvasAck { version, width, height }))
    })
    .await
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    #[default]
    Reference,
    Canvas,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompositionRequest {
    pub prompt: Option<String>,
    /// `[x_min, y_min, x_max, y_max]`, normalized.
    pub boxes: Vec<[f64; 4]>,
    pub target: Target,
    /// Replaces the session config for this request.
    pub config: Option<SessionConfig>,
    pub epsilon: Option<f64>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
}

impl CompositionRequest {
    pub fn effective_config(&self, session: &SessionConfig) -> SessionConfig {
        let mut cfg = self.config.unwrap_or(*session);
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(k) = self.k {
            cfg.k_lines = k;
        }
        if let Some(seed) = self.seed {
            cfg.ransac.seed = seed;
        }
        cfg
    }
}

async fn composition(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ServiceResult<Json<CompositionReport>> {
    let req: CompositionRequest = parse_body(&body)?;
    let boxes = pipeline::check_boxes(&req.boxes)?;
    let prompt = req.prompt.clone().filter(|p| !p.trim().is_empty());
    let session = app.store.get(&id)?;
    let provider = app.provider.clone();
    let provider_cfg = app.config.provider.clone();
    app.blocking(move || {
        let state = session.read();
        let cfg = req.effective_config(&state.config);
        cfg.validate()?;
        let (image, version) = match req.target {
            Target::Reference => (&state.reference, 0),
            Target::Canvas => {
                let c = state.canvas()?;
                (&c.image, c.version)
            }
        };
        let key = serde_json::json!({
            "provider": provider_cfg,
            "prompt": prompt,
            "boxes": boxes,
            "target": req.target,
            "version": version,
        })
        .to_string();
        let (seg, fallback) = match session.cached_segmentation(&key) {
            Some(hit) => (hit, false),
            None => {
                let request = SegmentationRequest {
                    image: image.clone(),
                    text_prompt: prompt.clone(),
                    boxes: boxes.clone(),
                };
                let (result, fallback) = pipeline::run_segmentation(&request, provider.as_ref())?;
                let result = Arc::new(result);
                // fallback answers are not cached so a recovered provider is retried
                if !fallback {
                    session.store_segmentation(key, result.clone());
                }
                (result, fallback)
            }
        };
        Ok(Json(pipeline::composition_report(&seg, fallback, &cfg)?))
    })
    .await
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeedbackRequest {
    pub config: Option<SessionConfig>,
}

async fn feedback(app: AppState, id: String, body: Bytes, mode: ClusterMode) -> ServiceResult<Json<FeedbackReport>> {
    let req: FeedbackRequest = parse_body(&body)?;
    let session = app.store.get(&id)?;
    let budget = app.budget();
    app.blocking(move || {
        let state = session.read();
        let cfg = req.config.unwrap_or(state.config);
        cfg.validate()?;
        state.canvas()?;
        let canvas = session.palette(&state, PaletteSource::Canvas, mode, &cfg.palette)?;
        let reference = session.palette(&state, PaletteSource::Reference, mode, &cfg.palette)?;
        Ok(Json(pipeline::feedback_report(&canvas, &reference, &cfg, budget)?))
    })
    .await
}

async fn value_feedback(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ServiceResult<Json<FeedbackReport>> {
    feedback(app, id, body, ClusterMode::Value).await
}

async fn color_feedback(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ServiceResult<Json<FeedbackReport>> {
    feedback(app, id, body, ClusterMode::Color).await
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct GuidanceQuery {
    pub target: Target,
    pub filter: Option<BlurFilter>,
    pub kernel_size: Option<f64>,
    pub range_sigma: Option<f64>,
}

async fn value_guidance(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<GuidanceQuery>,
) -> ServiceResult<Response> {
    let session = app.store.get(&id)?;
    app.blocking(move || {
        let state = session.read();
        let base = state.config.blur;
        let blur = BlurSpec {
            filter: q.filter.unwrap_or(base.filter),
            kernel_size: q.kernel_size.unwrap_or(base.kernel_size),
            range_sigma: q.range_sigma.unwrap_or(if q.filter.is_some() {
                DEFAULT_RANGE_SIGMA
            } else {
                base.range_sigma
            }),
        };
        let img = match q.target {
            Target::Reference => &state.reference,
            Target::Canvas => &state.canvas()?.image,
        };
        Ok(png(&pipeline::value_guidance(img, &blur)?))
    })
    .await
}

#[derive(Debug, Clone, Deserialize)]
pub struct IsolationQuery {
    pub x: i64,
    pub y: i64,
    pub threshold: Option<f64>,
}

async fn isolation(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<IsolationQuery>,
) -> ServiceResult<Response> {
    let session = app.store.get(&id)?;
    app.blocking(move || {
        let state = session.read();
        let cfg = state.config.palette;
        let palette = session.palette(&state, PaletteSource::Reference, ClusterMode::Color, &cfg)?;
        let threshold = q.threshold.unwrap_or(cfg.region_threshold);
        let out = isolate_color_preview_lab(&state.reference, &state.reference_lab, &palette, q.x, q.y, threshold)?;
        Ok(png(&out))
    })
    .await
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecolorRequest {
    /// Closed polygon in normalized canvas coordinates.
    pub lasso: Vec<NormPoint>,
    /// Degrees.
    pub hue: f64,
    /// In [0, 1].
    pub saturation: f64,
}

async fn recolor(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> ServiceResult<Response> {
    let req: RecolorRequest =
        serde_json::from_slice(&body).map_err(|e| ServiceError::BadRequest(format!("invalid JSON body: {e}")))?;
    if !req.hue.is_finite() || !(0.0..=1.0).contains(&req.saturation) {
        return Err(ServiceError::BadRequest("hue must be finite and saturation in [0, 1]".into()));
    }
    let session = app.store.get(&id)?;
    let store = app.store.clone();
    app.blocking(move || {
        let mut state = session.write();
        let canvas = &state.canvas()?.image;
        let (w, h) = canvas.dimensions();
        let mask = pipeline::rasterize_lasso(&req.lasso, w, h)?;
        let updated = recolor_region(canvas, &mask, req.hue, req.saturation)?;
        session.set_canvas(&mut state, updated)?;
        store.persist(&session, &state)?;
        Ok(png(&state.canvas()?.image))
    })
    .await
}
