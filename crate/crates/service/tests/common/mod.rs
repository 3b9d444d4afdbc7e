#![allow(dead_code)]

use axum::body::{Body, Bytes};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use drawscaffold_core::imagecore::ImageBuffer;
use drawscaffold_service::{router, AppState, ServiceConfig};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub struct TestApp {
    pub router: Router,
    pub state: AppState,
}

impl TestApp {
    pub fn new(config: ServiceConfig) -> Self {
        let state = AppState::new(config).unwrap();
        Self {
            router: router(state.clone()),
            state,
        }
    }

    pub fn default() -> Self {
        Self::new(ServiceConfig::default())
    }

    pub async fn call(&self, method: Method, uri: &str, body: impl Into<Body>) -> (StatusCode, Bytes) {
        let req = Request::builder().method(method).uri(uri).body(body.into()).unwrap();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        (status, bytes)
    }

    pub async fn json(&self, method: Method, uri: &str, body: Value) -> (StatusCode, Value) {
        let (status, bytes) = self.call(method, uri, body.to_string()).await;
        (status, parse(&bytes))
    }

    /// Creates a session and returns its id.
    pub async fn session(&self, reference: &ImageBuffer) -> String {
        let (status, bytes) = self.call(Method::POST, "/v1/sessions", reference.to_png_bytes()).await;
        assert_eq!(status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&bytes));
        parse(&bytes)["id"].as_str().unwrap().to_string()
    }

    pub async fn put_canvas(&self, id: &str, canvas: &ImageBuffer) {
        let (status, bytes) = self
            .call(Method::PUT, &format!("/v1/sessions/{id}/canvas"), canvas.to_png_bytes())
            .await;
        assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&bytes));
    }

    pub async fn image(&self, uri: &str) -> ImageBuffer {
        let (status, bytes) = self.call(Method::GET, uri, Body::empty()).await;
        assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&bytes));
        ImageBuffer::from_png_bytes(&bytes).unwrap()
    }
}

pub fn parse(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap_or_else(|_| panic!("not JSON: {}", String::from_utf8_lossy(bytes)))
}

/// Flat colored rectangles on a light background.
pub fn scene(width: u32, height: u32) -> ImageBuffer {
    ImageBuffer::from_fn(width, height, |x, y| {
        let (u, v) = (x as f64 / width as f64, y as f64 / height as f64);
        if (0.1..0.4).contains(&u) && (0.2..0.6).contains(&v) {
            [200, 60, 40]
        } else if (0.55..0.9).contains(&u) && (0.3..0.8).contains(&v) {
            [40, 90, 170]
        } else if v > 0.85 {
            [60, 50, 40]
        } else {
            [225, 215, 190]
        }
    })
    .unwrap()
}
