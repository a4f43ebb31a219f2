//! Graph discovery: start from the largest allowed graph, optimize edge
//! weights against a target, then prune edges while the loss stays below a
//! threshold.

mod analyzer;
mod initial;
mod objective;
mod optimize;
mod prune;
mod search;

pub use analyzer::{analyzer_functional, verify_analyzer, AnalyzerReport};
pub use initial::{build_initial_graph, expand_uncolored_edges, geometry_of, GeometryEdge, InitialConstraints};
pub use objective::{loss, loss_gradient, task_loss, task_loss_gradient, weights_of, Objective};
pub use optimize::{optimize_weights, OptimizeOutcome};
pub use prune::prune;
pub use search::{discover, validate_config};

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, Role, Vertex};
use crate::targets::TargetState;

/// What the graph is supposed to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Task {
    /// Post-selected state over non-ancilla vertices should equal the target.
    #[default]
    Generation,
    /// Coincidence functional over input vertices should project onto the target.
    Analyzer,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Generation => "generation",
            Task::Analyzer => "analyzer",
        }
    }

    /// Vertices whose modes form the ket for this task.
    pub fn sites(self, g: &ColoredGraph) -> Result<Vec<usize>> {
        match self {
            Task::Generation => Ok(g.state_sites()),
            Task::Analyzer => {
                let inputs = g.vertices_with_role(&[Role::Input]);
                if inputs.is_empty() {
                    Err(Error::NoInputVertices)
                } else {
                    Ok(inputs)
                }
            }
        }
    }

    /// Per-site dimensions a target must have for this roster.
    pub fn site_dims(self, roster: &[Vertex]) -> Vec<usize> {
        roster
            .iter()
            .filter(|v| match self {
                Task::Generation => v.role != Role::Ancilla,
                Task::Analyzer => v.role == Role::Input,
            })
            .map(|v| v.dimension)
            .collect()
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generation" => Ok(Task::Generation),
            "analyzer" => Ok(Task::Analyzer),
            other => Err(Error::InvalidConfig(format!("unknown task {other:?}; expected generation or analyzer"))),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSettings {
    pub max_iterations: usize,
    pub restarts: usize,
    /// First trial step of the backtracking line search.
    pub initial_step: f64,
    pub gradient_tol: f64,
    pub loss_tol: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings { max_iterations: 2000, restarts: 5, initial_step: 1.0, gradient_tol: 1e-8, loss_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CandidateOrder {
    /// Smallest `|weight|` first, ties in canonical edge order.
    #[default]
    AscendingWeight,
    /// Canonical edge order.
    Canonical,
}

impl CandidateOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            CandidateOrder::AscendingWeight => "ascending_weight",
            CandidateOrder::Canonical => "canonical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruningSettings {
    /// A removal is kept iff the re-optimized loss is at most this.
    pub threshold: f64,
    pub order: CandidateOrder,
}

impl Default for PruningSettings {
    fn default() -> Self {
        PruningSettings { threshold: 1e-2, order: CandidateOrder::AscendingWeight }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub name: String,
    pub roster: Vec<Vertex>,
    pub task: Task,
    pub target: TargetState,
    /// Restricts the initial graph; `None` means every allowed edge.
    pub geometry: Option<Vec<GeometryEdge>>,
    pub constraints: InitialConstraints,
    pub optimizer: OptimizerSettings,
    pub pruning: PruningSettings,
    pub seed: u64,
}

impl SearchConfig {
    pub fn new(name: impl Into<String>, roster: Vec<Vertex>, task: Task, target: TargetState) -> Self {
        SearchConfig {
            name: name.into(),
            roster,
            task,
            target,
            geometry: None,
            constraints: InitialConstraints::default(),
            optimizer: OptimizerSettings::default(),
            pruning: PruningSettings::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub graph: ColoredGraph,
    pub loss: f64,
    /// Loss after the initial optimization, then after each accepted removal.
    pub loss_trace: Vec<f64>,
    pub initial_edges: usize,
    pub edges_removed: usize,
    pub seed: u64,
    /// Final loss is within the pruning threshold.
    pub feasible: bool,
    /// The initial optimization met a convergence criterion.
    pub converged: bool,
    /// Optimizer iterations summed over every restart and re-optimization.
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Optimizing,
    Pruning,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Optimizing => "optimizing",
            Phase::Pruning => "pruning",
        }
    }
}

/// Serializes as `{"type": "phase" | "restart_best" | "edge_removed" | "done", ...}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProgressEvent {
    Phase { phase: Phase, edge_count: usize },
    RestartBest { restart: usize, loss: f64 },
    EdgeRemoved { edge_count: usize, loss: f64 },
    Done { loss: f64, edge_count: usize, feasible: bool },
}

/// Receives progress and answers cancellation polls. Shared across restart workers.
pub trait Observer: Sync {
    fn on_event(&self, _event: &ProgressEvent) {}

    fn is_cancelled(&self) -> bool {
        false
    }
}

/// Ignores all events and never cancels.
pub struct Silent;

impl Observer for Silent {}

impl<F: Fn(&ProgressEvent) + Sync> Observer for F {
    fn on_event(&self, event: &ProgressEvent) {
        self(event)
    }
}
