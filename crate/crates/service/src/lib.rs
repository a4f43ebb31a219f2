//! Local web service over the qgraph engine.
//!
//! Resources:
//!
//! | method | path | body / answer |
//! |---|---|---|
//! | GET | `/graphs` | `{"graphs": [names]}` |
//! | GET, PUT, DELETE | `/graphs/{name}` | graph document |
//! | GET | `/graphs/{name}/state` | state document |
//! | GET | `/graphs/{name}/matchings[?ket=0101]` | matchings or cancellation report |
//! | GET | `/graphs/{name}/layout[?seed=&max_iters=]` | positions and stress |
//! | GET | `/graphs/{name}/template?target=ghz:4,2` | search template |
//! | POST | `/state`, `/matchings`, `/layout` | same, for a graph document in the body |
//! | GET, POST | `/jobs` | list; submit a search template |
//! | GET | `/jobs/{id}` | status, progress and result |
//! | GET | `/jobs/{id}/events` | server-sent progress events |
//! | GET | `/jobs/{id}/result` | result graph document |
//! | POST | `/jobs/{id}/cancel` | request cancellation |

mod api;
mod error;
pub mod jobs;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::Router;
use tower_http::cors::CorsLayer;

pub use api::AppState;
pub use error::ApiError;
pub use jobs::{JobManager, JobState};

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    pub library_dir: PathBuf,
    pub workers: usize,
    /// Finished jobs are forgotten after this long.
    pub job_ttl: Duration,
    /// Append-only JSON-lines record of submissions and outcomes.
    pub job_log: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            addr: SocketAddr::from(([127, 0, 0, 1], 8080)),
            library_dir: PathBuf::from("library"),
            workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            job_ttl: Duration::from_secs(24 * 60 * 60),
            job_log: None,
        }
    }
}

/// Builds the shared state; creates the library directory if needed.
pub fn app_state(config: &ServiceConfig) -> std::io::Result<AppState> {
    std::fs::create_dir_all(&config.library_dir)?;
    let jobs = JobManager::new(config.workers, config.job_ttl, config.job_log.as_deref())?;
    Ok(AppState::new(config.library_dir.clone(), Arc::new(jobs)))
}

pub fn app(state: AppState) -> Router {
    api::router(state).layer(CorsLayer::permissive())
}

/// Periodically drops expired jobs.
pub fn spawn_sweeper(jobs: Arc<JobManager>) -> tokio::task::JoinHandle<()> {
    let period = (jobs.ttl() / 4).clamp(Duration::from_millis(100), Duration::from_secs(60));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            jobs.sweep(Instant::now());
        }
    })
}

/// Serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let state = app_state(&config)?;
    let sweeper = spawn_sweeper(Arc::clone(&state.jobs));
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    eprintln!("qgraph-service listening on http://{}", listener.local_addr()?);
    let result = axum::serve(listener, app(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    sweeper.abort();
    result
}
