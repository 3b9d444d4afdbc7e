//! HTTP session service over the drawscaffold analysis engine.
//!
//! Sessions hold a reference image, an optional canvas snapshot and a
//! [`SessionConfig`]; see [`api::router`] for the routes.

pub mod api;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod store;

pub use api::{router, AppState};
pub use config::{ServiceConfig, SessionConfig};
pub use error::{ServiceError, ServiceResult};

/// Binds `config.listen` and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> ServiceResult<()> {
    let listen = config.listen.clone();
    let state = AppState::new(config)?;
    let listener = tokio::net::TcpListener::bind(&listen)
        .await
        .map_err(|e| ServiceError::Config(format!("cannot bind {listen}: {e}")))?;
    tracing::info!(addr = %listen, sessions = state.store.len(), "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))
}
