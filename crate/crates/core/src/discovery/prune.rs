use crate::error::Result;
use crate::graph::ColoredGraph;
use crate::targets::TargetState;

use super::objective::task_loss;
use super::optimize::optimize_weights;
use super::{CandidateOrder, Observer, OptimizerSettings, ProgressEvent, PruningSettings, SearchResult, Task};

fn candidate_order(g: &ColoredGraph, order: CandidateOrder) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..g.num_edges()).collect();
    if order == CandidateOrder::AscendingWeight {
        idx.sort_by(|&a, &b| {
            let (ea, eb) = (&g.edges[a], &g.edges[b]);
            ea.weight.norm().total_cmp(&eb.weight.norm()).then(ea.key().cmp(&eb.key()))
        });
    } else {
        idx.sort_by_key(|&i| g.edges[i].key());
    }
    idx
}

/// Removes edges one at a time while the re-optimized loss stays within the threshold.
///
/// Candidates are tried in the configured order; each trial re-optimizes the
/// remaining weights starting from the current ones. An accepted removal
/// restarts the scan. The search ends when no single removal survives.
/// A start graph already above the threshold is returned unchanged and
/// flagged infeasible.
pub fn prune(
    g: &ColoredGraph,
    target: &TargetState,
    task: Task,
    optimizer: &OptimizerSettings,
    pruning: &PruningSettings,
    observer: &dyn Observer,
) -> Result<SearchResult> {
    let mut current = g.clone();
    let mut current_loss = task_loss(&current, target, task)?;
    let mut trace = vec![current_loss];
    let mut removed = 0;
    let mut iterations = 0;
    let feasible = current_loss <= pruning.threshold;
    let reoptimize = OptimizerSettings { restarts: 1, ..optimizer.clone() };

    if feasible {
        loop {
            let mut accepted = None;
            for idx in candidate_order(&current, pruning.order) {
                let candidate = current.without_edge(idx);
                let out = optimize_weights(&candidate, target, task, &reoptimize, 0, observer)?;
                iterations += out.iterations;
                if out.loss <= pruning.threshold {
                    accepted = Some(out);
                    break;
                }
            }
            let Some(out) = accepted else { break };
            current = out.graph;
            current_loss = out.loss;
            removed += 1;
            trace.push(current_loss);
            observer.on_event(&ProgressEvent::EdgeRemoved { edge_count: current.num_edges(), loss: current_loss });
        }
    }

    let loss = task_loss(&current, target, task)?;
    Ok(SearchResult {
        initial_edges: g.num_edges(),
        graph: current,
        loss,
        loss_trace: trace,
        edges_removed: removed,
        seed: 0,
        feasible: loss <= pruning.threshold,
        converged: true,
        iterations,
    })
}
