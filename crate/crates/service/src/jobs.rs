//! Search jobs: a FIFO queue in front of a bounded worker pool, with a
//! replayable per-job event history.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use futures::Stream;
use serde::Serialize;
use tokio::sync::{watch, Semaphore};

use qgraph_core::discovery::{discover, Observer, Phase, ProgressEvent, SearchConfig, SearchResult};
use qgraph_core::Error as EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
    Cancelled,
}

impl JobState {
    pub fn is_finished(self) -> bool {
        matches!(self, JobState::Done | JobState::Failed | JobState::Cancelled)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    Phase { phase: Phase, edge_count: usize },
    RestartBest { restart: usize, loss: f64 },
    EdgeRemoved { edge_count: usize, loss: f64 },
    Done { loss: f64, edge_count: usize, feasible: bool },
    Failed { message: String },
    Cancelled,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Phase { .. } => "phase",
            EventKind::RestartBest { .. } => "restart_best",
            EventKind::EdgeRemoved { .. } => "edge_removed",
            EventKind::Done { .. } => "done",
            EventKind::Failed { .. } => "failed",
            EventKind::Cancelled => "cancelled",
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, EventKind::Done { .. } | EventKind::Failed { .. } | EventKind::Cancelled)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JobEvent {
    pub seq: usize,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Progress {
    pub phase: Phase,
    /// Best loss seen so far in the current phase.
    pub loss: Option<f64>,
    pub edge_count: usize,
}

#[derive(Debug)]
struct JobInner {
    state: JobState,
    progress: Option<Progress>,
    result: Option<Arc<SearchResult>>,
    error: Option<String>,
    events: Vec<JobEvent>,
    finished_at: Option<Instant>,
}

#[derive(Debug)]
pub struct Job {
    id: String,
    config: SearchConfig,
    submitted_at: SystemTime,
    cancel: AtomicBool,
    inner: Mutex<JobInner>,
    /// Number of events recorded; subscribers wake on change.
    events_len: watch::Sender<usize>,
}

/// Point-in-time view of a job.
#[derive(Debug, Clone)]
pub struct JobSnapshot {
    pub id: String,
    pub name: String,
    pub state: JobState,
    pub submitted_at: SystemTime,
    pub progress: Option<Progress>,
    pub result: Option<Arc<SearchResult>>,
    pub error: Option<String>,
    pub event_count: usize,
}

impl Job {
    fn new(id: String, config: SearchConfig) -> Self {
        Job {
            id,
            config,
            submitted_at: SystemTime::now(),
            cancel: AtomicBool::new(false),
            inner: Mutex::new(JobInner {
                state: JobState::Queued,
                progress: None,
                result: None,
                error: None,
                events: Vec::new(),
                finished_at: None,
            }),
            events_len: watch::channel(0).0,
        }
    }

    fn lock(&self) -> MutexGuard<'_, JobInner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn snapshot(&self) -> JobSnapshot {
        let inner = self.lock();
        JobSnapshot {
            id: self.id.clone(),
            name: self.config.name.clone(),
            state: inner.state,
            submitted_at: self.submitted_at,
            progress: inner.progress.clone(),
            result: inner.result.clone(),
            error: inner.error.clone(),
            event_count: inner.events.len(),
        }
    }

    fn push(&self, inner: &mut JobInner, kind: EventKind) {
        match &kind {
            EventKind::Phase { phase, edge_count } => {
                inner.progress = Some(Progress { phase: *phase, loss: None, edge_count: *edge_count })
            }
            EventKind::RestartBest { loss, .. } => {
                if let Some(p) = inner.progress.as_mut() {
                    p.loss = Some(p.loss.map_or(*loss, |l| l.min(*loss)));
                }
            }
            EventKind::EdgeRemoved { edge_count, loss } => {
                if let Some(p) = inner.progress.as_mut() {
                    p.loss = Some(*loss);
                    p.edge_count = *edge_count;
                }
            }
            _ => {}
        }
        inner.events.push(JobEvent { seq: inner.events.len(), kind });
        self.events_len.send_replace(inner.events.len());
    }

    fn finish(&self, inner: &mut JobInner, state: JobState, kind: EventKind) {
        inner.state = state;
        inner.finished_at = Some(Instant::now());
        self.push(inner, kind);
    }

    /// Events with `seq >= from`, live until the terminal event.
    pub fn events(self: &Arc<Self>, from: usize) -> impl Stream<Item = JobEvent> + Send + 'static {
        let rx = self.events_len.subscribe();
        futures::stream::unfold((Arc::clone(self), rx, from, false), |(job, mut rx, cursor, ended)| async move {
            if ended {
                return None;
            }
            loop {
                rx.borrow_and_update();
                let (next, finished) = {
                    let inner = job.lock();
                    (inner.events.get(cursor).cloned(), inner.state.is_finished())
                };
                if let Some(event) = next {
                    let terminal = event.kind.is_terminal();
                    return Some((event, (job, rx, cursor + 1, terminal)));
                }
                if finished {
                    return None;
                }
                if rx.changed().await.is_err() {
                    return None;
                }
            }
        })
    }
}

struct JobObserver<'a>(&'a Job);

impl Observer for JobObserver<'_> {
    fn on_event(&self, event: &ProgressEvent) {
        let kind = match *event {
            ProgressEvent::Phase { phase, edge_count } => EventKind::Phase { phase, edge_count },
            ProgressEvent::RestartBest { restart, loss } => EventKind::RestartBest { restart, loss },
            ProgressEvent::EdgeRemoved { edge_count, loss } => EventKind::EdgeRemoved { edge_count, loss },
            // Published together with the stored result once discover returns.
            ProgressEvent::Done { .. } => return,
        };
        let mut inner = self.0.lock();
        self.0.push(&mut inner, kind);
    }

    fn is_cancelled(&self) -> bool {
        self.0.cancel.load(Ordering::Relaxed)
    }
}

/// Owns every job, the worker permits and the optional job log.
pub struct JobManager {
    jobs: Mutex<HashMap<String, Arc<Job>>>,
    permits: Arc<Semaphore>,
    workers: usize,
    ttl: Duration,
    log: Option<Mutex<File>>,
}

impl JobManager {
    pub fn new(workers: usize, ttl: Duration, log_path: Option<&Path>) -> std::io::Result<Self> {
        let workers = workers.max(1);
        let log = match log_path {
            Some(p) => Some(Mutex::new(OpenOptions::new().create(true).append(true).open(p)?)),
            None => None,
        };
        Ok(JobManager {
            jobs: Mutex::new(HashMap::new()),
            permits: Arc::new(Semaphore::new(workers)),
            workers,
            ttl,
            log,
        })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    fn jobs(&self) -> MutexGuard<'_, HashMap<String, Arc<Job>>> {
        self.jobs.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn record(&self, job: &Job, what: &str, extra: serde_json::Value) {
        let Some(log) = &self.log else { return };
        let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
        let mut line = serde_json::json!({ "ts_ms": ts, "job": job.id, "name": job.config.name, "event": what });
        if let (Some(obj), serde_json::Value::Object(more)) = (line.as_object_mut(), extra) {
            obj.extend(more);
        }
        let mut file = log.lock().unwrap_or_else(|e| e.into_inner());
        // The log is advisory; a failed append must not take the job down.
        let _ = writeln!(file, "{line}");
    }

    /// Queues a search; it starts once a worker permit is free (FIFO).
    pub fn submit(self: &Arc<Self>, config: SearchConfig) -> Arc<Job> {
        let job = Arc::new(Job::new(uuid::Uuid::new_v4().simple().to_string(), config));
        self.jobs().insert(job.id.clone(), Arc::clone(&job));
        self.record(&job, "submitted", serde_json::json!({}));
        let manager = Arc::clone(self);
        let worker_job = Arc::clone(&job);
        tokio::spawn(async move { manager.run(worker_job).await });
        job
    }

    async fn run(self: Arc<Self>, job: Arc<Job>) {
        let Ok(_permit) = Arc::clone(&self.permits).acquire_owned().await else { return };
        {
            let mut inner = job.lock();
            if inner.state != JobState::Queued {
                return;
            }
            inner.state = JobState::Running;
        }
        let worker = Arc::clone(&job);
        let outcome = tokio::task::spawn_blocking(move || discover(&worker.config, &JobObserver(&worker))).await;

        let mut inner = job.lock();
        match outcome {
            Ok(Ok(result)) => {
                let kind = EventKind::Done {
                    loss: result.loss,
                    edge_count: result.graph.num_edges(),
                    feasible: result.feasible,
                };
                inner.result = Some(Arc::new(result));
                job.finish(&mut inner, JobState::Done, kind);
            }
            Ok(Err(EngineError::Cancelled)) => job.finish(&mut inner, JobState::Cancelled, EventKind::Cancelled),
            Ok(Err(e)) => {
                inner.error = Some(e.to_string());
                job.finish(&mut inner, JobState::Failed, EventKind::Failed { message: e.to_string() });
            }
            Err(_) => {
                let message = "search worker crashed".to_string();
                inner.error = Some(message.clone());
                job.finish(&mut inner, JobState::Failed, EventKind::Failed { message });
            }
        }
        let (state, loss) = (inner.state, inner.result.as_ref().map(|r| r.loss));
        drop(inner);
        self.record(&job, "finished", serde_json::json!({ "state": state, "loss": loss }));
    }

    pub fn get(&self, id: &str) -> Option<Arc<Job>> {
        self.jobs().get(id).cloned()
    }

    /// All jobs, oldest submission first.
    pub fn list(&self) -> Vec<Arc<Job>> {
        let mut jobs: Vec<Arc<Job>> = self.jobs().values().cloned().collect();
        jobs.sort_by(|a, b| a.submitted_at.cmp(&b.submitted_at).then_with(|| a.id.cmp(&b.id)));
        jobs
    }

    /// Requests cancellation. Queued jobs are cancelled at once; running jobs
    /// stop at the next optimizer step; finished jobs are left as they are.
    pub fn cancel(&self, id: &str) -> Option<JobState> {
        let job = self.get(id)?;
        job.cancel.store(true, Ordering::Relaxed);
        let mut inner = job.lock();
        if inner.state == JobState::Queued {
            job.finish(&mut inner, JobState::Cancelled, EventKind::Cancelled);
            drop(inner);
            self.record(&job, "finished", serde_json::json!({ "state": JobState::Cancelled }));
            return Some(JobState::Cancelled);
        }
        Some(inner.state)
    }

    /// Drops finished jobs older than the TTL; returns how many were removed.
    pub fn sweep(&self, now: Instant) -> usize {
        let mut jobs = self.jobs();
        let before = jobs.len();
        jobs.retain(|_, job| match job.lock().finished_at {
            Some(t) => now.saturating_duration_since(t) < self.ttl,
            None => true,
        });
        before - jobs.len()
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }
}
