use crate::error::{Error, Result};
use crate::graph::validate_graph;

use super::initial::{build_initial_graph, expand_uncolored_edges};
use super::optimize::optimize_weights;
use super::prune::prune;
use super::{Observer, Phase, ProgressEvent, SearchConfig, SearchResult, Task};

/// Checks that the roster, target and geometry fit together.
pub fn validate_config(config: &SearchConfig) -> Result<()> {
    if config.roster.is_empty() {
        return Err(Error::InvalidConfig("vertex roster is empty".into()));
    }
    let dims = config.task.site_dims(&config.roster);
    if config.task == Task::Analyzer && dims.is_empty() {
        return Err(Error::NoInputVertices);
    }
    if dims != config.target.dims() {
        return Err(Error::InvalidConfig(format!(
            "target dims {:?} do not match the {} sites of the roster {:?}",
            config.target.dims(),
            config.task,
            dims
        )));
    }
    if config.task == Task::Generation && config.roster.len() % 2 == 1 {
        return Err(Error::OddVertexCount(config.roster.len()));
    }
    if config.pruning.threshold.is_nan() || config.pruning.threshold < 0.0 {
        return Err(Error::InvalidConfig("pruning threshold must be non-negative".into()));
    }
    if config.optimizer.initial_step.is_nan() || config.optimizer.initial_step <= 0.0 {
        return Err(Error::InvalidConfig("initial step must be positive".into()));
    }
    Ok(())
}

/// Builds (or expands) the initial graph, optimizes its weights and prunes it.
///
/// Reproducible from `config.seed`. The result carries a feasibility flag
/// instead of failing when the threshold cannot be met.
pub fn discover(config: &SearchConfig, observer: &dyn Observer) -> Result<SearchResult> {
    validate_config(config)?;
    let mut initial = match &config.geometry {
        None => build_initial_graph(&config.roster, &config.constraints, config.task, config.seed)?,
        Some(geometry) => expand_uncolored_edges(&config.roster, geometry, config.seed)?,
    };
    initial.name = config.name.clone();
    let report = validate_graph(&initial);
    if !report.is_ok() {
        return Err(Error::InvalidGraph(report));
    }

    observer.on_event(&ProgressEvent::Phase { phase: Phase::Optimizing, edge_count: initial.num_edges() });
    let optimized = optimize_weights(&initial, &config.target, config.task, &config.optimizer, config.seed, observer)?;

    observer.on_event(&ProgressEvent::Phase { phase: Phase::Pruning, edge_count: optimized.graph.num_edges() });
    let mut result =
        prune(&optimized.graph, &config.target, config.task, &config.optimizer, &config.pruning, observer)?;
    result.initial_edges = initial.num_edges();
    result.seed = config.seed;
    result.converged = optimized.converged;
    result.iterations += optimized.iterations;

    observer.on_event(&ProgressEvent::Done {
        loss: result.loss,
        edge_count: result.graph.num_edges(),
        feasible: result.feasible,
    });
    Ok(result)
}
