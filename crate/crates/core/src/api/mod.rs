//! HTTP/JSON service over the store, index and narrative engine.
//!
//! Reads go through an immutable [`View`] (corpus plus index) that is
//! swapped atomically whenever the corpus changes; writes funnel through the
//! single [`Store`] handle.

mod error;
mod routes;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::thread::JoinHandle;

use axum::Router;
use tokio::sync::{oneshot, Semaphore};

use crate::explore::{ExploreError, GeneIndex};
use crate::narrative::{PromptTemplate, ProviderRegistry, RemoteConfig, RemoteProvider};
use crate::store::{Corpus, Store, StoreError};

pub use error::{ApiError, ErrorBody};
pub use routes::{
    ArtifactList, ConceptView, CostumeDetail, CostumeList, CostumeSummary, FavoriteList, FavoriteRequest,
    GenerateRequest, GenerateResponse, SearchResults, TagCount, TagList,
};

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub host: String,
    pub port: u16,
    pub data_dir: PathBuf,
    /// Registered as provider `remote` when set.
    pub remote: Option<RemoteConfig>,
    pub template: PromptTemplate,
    /// Provider calls allowed in flight at once.
    pub max_in_flight: usize,
}

impl ServeConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        ServeConfig {
            host: "127.0.0.1".to_string(),
            port: 8080,
            data_dir: data_dir.into(),
            remote: None,
            template: PromptTemplate::default(),
            max_in_flight: 4,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot index corpus: {0}")]
    Index(#[from] ExploreError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("server runtime: {0}")]
    Runtime(std::io::Error),
}

/// Corpus snapshot with its index.
#[derive(Debug)]
pub struct View {
    pub corpus: Corpus,
    pub index: GeneIndex,
}

impl View {
    pub fn build(corpus: Corpus) -> Result<Self, ExploreError> {
        let index = GeneIndex::build(corpus.records())?;
        Ok(View { corpus, index })
    }
}

pub struct AppState {
    store: Mutex<Store>,
    view: RwLock<Arc<View>>,
    providers: ProviderRegistry,
    template: PromptTemplate,
    generate_slots: Semaphore,
}

impl AppState {
    pub fn new(store: Store, config: &ServeConfig) -> Result<Self, ServeError> {
        let view = View::build(store.corpus().clone())?;
        let mut providers = ProviderRegistry::with_mock();
        if let Some(remote) = &config.remote {
            providers.register(Arc::new(RemoteProvider::new(remote.clone())));
        }
        Ok(AppState {
            store: Mutex::new(store),
            view: RwLock::new(Arc::new(view)),
            providers,
            template: config.template.clone(),
            generate_slots: Semaphore::new(config.max_in_flight.max(1)),
        })
    }

    /// Current read view; callers keep a consistent snapshot for the whole
    /// request.
    pub fn view(&self) -> Arc<View> {
        self.view.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    fn store(&self) -> std::sync::MutexGuard<'_, Store> {
        self.store.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Apply a corpus mutation and swap in a rebuilt view.
    pub fn mutate_corpus<T>(&self, f: impl FnOnce(&mut Store) -> Result<T, StoreError>) -> Result<T, ApiError> {
        let mut store = self.store();
        let out = f(&mut store)?;
        let view = View::build(store.corpus().clone())?;
        *self.view.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(view);
        Ok(out)
    }
}

/// Router over an opened store.
pub fn router(state: Arc<AppState>) -> Router {
    routes::router(state)
}

/// Running server on a background thread.
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<Result<(), ServeError>>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Stop accepting connections and wait for the server to exit.
    pub fn shutdown(mut self) -> Result<(), ServeError> {
        self.stop()
    }

    fn stop(&mut self) -> Result<(), ServeError> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        match self.thread.take() {
            Some(t) => t.join().unwrap_or(Ok(())),
            None => Ok(()),
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        let _ = self.stop();
    }
}

/// Open the store, bind, and serve on a dedicated runtime thread. Port 0
/// picks a free port; see [`ServerHandle::local_addr`].
pub fn spawn(config: ServeConfig) -> Result<ServerHandle, ServeError> {
    let store = Store::open(&config.data_dir)?;
    let state = Arc::new(AppState::new(store, &config)?);
    let addr = format!("{}:{}", config.host, config.port);
    let listener =
        std::net::TcpListener::bind(&addr).map_err(|source| ServeError::Bind { addr: addr.clone(), source })?;
    listener.set_nonblocking(true).map_err(ServeError::Runtime)?;
    let local = listener.local_addr().map_err(ServeError::Runtime)?;
    let (tx, rx) = oneshot::channel::<()>();

    let thread = std::thread::spawn(move || -> Result<(), ServeError> {
        let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(ServeError::Runtime)?;
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).map_err(ServeError::Runtime)?;
            axum::serve(listener, router(state))
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await
                .map_err(ServeError::Runtime)
        })
    });
    Ok(ServerHandle { addr: local, shutdown: Some(tx), thread: Some(thread) })
}
