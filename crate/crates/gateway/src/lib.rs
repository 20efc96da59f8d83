//! HTTP service over the planning engine: one-step expansion, asynchronous
//! tree search jobs with persisted results, per-user ban lists and the
//! buyables catalog.

mod api;
mod auth;
mod error;
mod schema;
mod store;

pub use api::{endpoints, Endpoint, ExpandResponse, JobResult};
pub use auth::{User, ANONYMOUS};
pub use error::{ApiError, ErrorBody};
pub use schema::schemas;
pub use store::{JobCounts, JobKind, JobRecord, JobStatus, INTERRUPTED};

use axum::Router;
use retroplan_core::settings::BUYABLES_SNAPSHOT;
use retroplan_core::{Catalog, OneStep, Settings, SettingsError};
use std::collections::BTreeMap;
use std::future::Future;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Instant;
use store::{BanStore, JobStore};
use tokio::sync::{OwnedRwLockWriteGuard, Semaphore};
use tokio_util::task::TaskTracker;

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error(transparent)]
    Settings(#[from] SettingsError),
    #[error(transparent)]
    OneStep(#[from] retroplan_core::OneStepError),
    #[error("data directory {path}: {cause}")]
    DataDir { path: String, cause: std::io::Error },
}

/// Shared service state. Cheap to clone.
#[derive(Clone)]
pub struct AppState(Arc<Inner>);

struct Inner {
    settings: Settings,
    one_step: Arc<OneStep>,
    catalog: RwLock<Arc<Catalog>>,
    jobs: JobStore,
    bans: BanStore,
    /// Date to "METHOD /path" to count.
    calls: Mutex<BTreeMap<String, BTreeMap<String, u64>>>,
    workers: Arc<Semaphore>,
    gate: Arc<tokio::sync::RwLock<()>>,
    tasks: TaskTracker,
    closing: AtomicBool,
    started: Instant,
}

impl AppState {
    /// Load stores and open the data directory. Jobs a previous process
    /// left unfinished are marked failed.
    pub fn new(settings: Settings) -> Result<Self, GatewayError> {
        settings.validate()?;
        let stores = settings.load_stores()?;
        let one_step = stores.one_step(&settings)?;
        let dir_err = |cause| GatewayError::DataDir {
            path: settings.data_dir.display().to_string(),
            cause,
        };
        std::fs::create_dir_all(&settings.data_dir).map_err(dir_err)?;
        let jobs = JobStore::open(&settings.data_dir).map_err(dir_err)?;
        let bans = BanStore::open(&settings.data_dir).map_err(dir_err)?;
        Ok(AppState(Arc::new(Inner {
            workers: Arc::new(Semaphore::new(settings.workers)),
            settings,
            one_step: Arc::new(one_step),
            catalog: RwLock::new(Arc::new(stores.catalog)),
            jobs,
            bans,
            calls: Mutex::new(BTreeMap::new()),
            gate: Arc::new(tokio::sync::RwLock::new(())),
            tasks: TaskTracker::new(),
            closing: AtomicBool::new(false),
            started: Instant::now(),
        })))
    }

    pub fn settings(&self) -> &Settings {
        &self.0.settings
    }

    /// Keep queued jobs from starting until the guard is dropped.
    pub async fn hold(&self) -> OwnedRwLockWriteGuard<()> {
        self.0.gate.clone().write_owned().await
    }

    /// Stop accepting work, cancel running searches and wait for every job
    /// to record its final status.
    pub async fn shutdown(&self) {
        self.0.closing.store(true, Ordering::SeqCst);
        self.0.jobs.cancel_all();
        self.0.tasks.close();
        self.0.tasks.wait().await;
    }

    /// Wait until no job is queued or running.
    pub async fn idle(&self) {
        while self.0.jobs.counts().started > 0 {
            tokio::time::sleep(std::time::Duration::from_millis(10)).await;
        }
    }

    fn catalog(&self) -> Arc<Catalog> {
        self.0.catalog.read().unwrap().clone()
    }

    fn snapshot_path(&self) -> PathBuf {
        self.0.settings.data_dir.join(BUYABLES_SNAPSHOT)
    }

    fn record_call(&self, key: String) {
        let day = chrono::Utc::now().date_naive().to_string();
        *self.0.calls.lock().unwrap().entry(day).or_default().entry(key).or_default() += 1;
    }
}

pub fn router(state: AppState) -> Router {
    api::router(state)
}

/// Bind, serve until `shutdown` resolves, then drain jobs.
pub async fn serve(state: AppState, shutdown: impl Future<Output = ()> + Send + 'static) -> std::io::Result<()> {
    let s = state.settings();
    let listener = tokio::net::TcpListener::bind((s.host.as_str(), s.port)).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    serve_on(listener, state, shutdown).await
}

pub async fn serve_on(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(shutdown)
        .await?;
    state.shutdown().await;
    Ok(())
}
