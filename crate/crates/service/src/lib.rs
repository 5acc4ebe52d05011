//! HTTP facade over a trained model.
//!
//! Endpoints live under `/api/v1`:
//!
//! | method | path         | body                                              |
//! |--------|--------------|---------------------------------------------------|
//! | GET    | `/model`     |                                                   |
//! | POST   | `/predict`   | `{"instance": {...}}`                             |
//! | POST   | `/whatif`    | `{"instance": {...}, "attribute": a, "value": v}` |
//! | POST   | `/recommend` | `{"pool": [{"id", "instance"}], "team_size": n, "target"?, "threshold"?}` |
//! | GET    | `/rules`     |                                                   |
//! | GET    | `/influence` |                                                   |
//! | GET    | `/health`    |                                                   |
//!
//! The model is read-only. A reload (SIGHUP on Unix) parses the model file
//! again and swaps the whole snapshot, so a request sees either the old
//! model or the new one, never a mixture.

mod api;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;
use talentbayes::{deserialize, NaiveBayesModel};

pub use api::{handle, model_summary, status_of, ApiResponse, LoadedModel, API_PREFIX};

pub const PORT_ENV: &str = "TALENTBAYES_PORT";
pub const DEFAULT_PORT: u16 = 8080;

/// The current model snapshot, replaced only as a whole.
#[derive(Debug)]
pub struct ServiceState {
    current: RwLock<Arc<LoadedModel>>,
    source: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("cannot read model file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] talentbayes::Error),
    #[error("invalid port: {0}")]
    Port(String),
    #[error("server error: {0}")]
    Server(std::io::Error),
}

fn read_model(path: &Path) -> Result<NaiveBayesModel, ServiceError> {
    let text = std::fs::read_to_string(path).map_err(|source| ServiceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(deserialize(&text)?)
}

impl ServiceState {
    pub fn new(model: NaiveBayesModel) -> Self {
        Self {
            current: RwLock::new(Arc::new(LoadedModel::new(model))),
            source: None,
        }
    }

    pub fn from_file(path: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let path = path.into();
        let model = read_model(&path)?;
        Ok(Self {
            current: RwLock::new(Arc::new(LoadedModel::new(model))),
            source: Some(path),
        })
    }

    pub fn snapshot(&self) -> Arc<LoadedModel> {
        Arc::clone(&self.current.read().expect("state lock poisoned"))
    }

    pub fn replace(&self, model: NaiveBayesModel) {
        let next = Arc::new(LoadedModel::new(model));
        *self.current.write().expect("state lock poisoned") = next;
    }

    /// Re-read the model file. On failure the current model stays in place.
    /// Returns the new fingerprint.
    pub fn reload(&self) -> Result<String, ServiceError> {
        let Some(path) = &self.source else {
            return Ok(self.snapshot().fingerprint().to_string());
        };
        let model = read_model(path)?;
        self.replace(model);
        Ok(self.snapshot().fingerprint().to_string())
    }
}

async fn dispatch(
    State(state): State<Arc<ServiceState>>,
    method: Method,
    uri: Uri,
    body: Bytes,
) -> Response {
    let snapshot = state.snapshot();
    let r = handle(&snapshot, method.as_str(), uri.path(), &body);
    let status = StatusCode::from_u16(r.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, [(header::CONTENT_TYPE, "application/json")], r.body).into_response()
}

pub fn router(state: Arc<ServiceState>) -> Router {
    Router::new().fallback(dispatch).with_state(state)
}

/// The listen port: the flag if given, else `TALENTBAYES_PORT`, else 8080.
pub fn resolve_port(flag: Option<u16>, env: Option<&str>) -> Result<u16, ServiceError> {
    if let Some(p) = flag {
        return Ok(p);
    }
    match env {
        Some(raw) if !raw.trim().is_empty() => raw
            .trim()
            .parse()
            .map_err(|_| ServiceError::Port(format!("{PORT_ENV}={raw:?} is not a port number"))),
        _ => Ok(DEFAULT_PORT),
    }
}

#[cfg(unix)]
fn spawn_reload_listener(state: Arc<ServiceState>) {
    use tokio::signal::unix::{signal, SignalKind};
    tokio::spawn(async move {
        let Ok(mut hangups) = signal(SignalKind::hangup()) else {
            return;
        };
        while hangups.recv().await.is_some() {
            match state.reload() {
                Ok(fp) => eprintln!("reloaded model, fingerprint {fp}"),
                Err(e) => eprintln!("reload failed, keeping current model: {e}"),
            }
        }
    });
}

#[cfg(not(unix))]
fn spawn_reload_listener(_state: Arc<ServiceState>) {}

/// Serve until Ctrl-C.
pub async fn serve(state: Arc<ServiceState>, addr: SocketAddr) -> Result<(), ServiceError> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(ServiceError::Server)?;
    eprintln!(
        "listening on http://{} (model {})",
        listener.local_addr().map_err(ServiceError::Server)?,
        state.snapshot().fingerprint()
    );
    spawn_reload_listener(Arc::clone(&state));
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(ServiceError::Server)
}
