use serde::{Deserialize, Serialize};

use crate::discovery::{
    geometry_of, CandidateOrder, GeometryEdge, InitialConstraints, OptimizerSettings, PruningSettings, SearchConfig,
    Task,
};
use crate::graph::{ColoredGraph, Vertex};
use crate::state::QuantumState;
use crate::targets::TargetState;

use super::{decode_terms, encode_terms, parse_document, render_document, FormatError, TermDoc, VertexDoc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum TaskDoc {
    Generation,
    Analyzer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum OrderDoc {
    AscendingWeight,
    Canonical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintsDoc {
    #[serde(default)]
    excluded_pairs: Vec<[usize; 2]>,
    #[serde(default)]
    same_mode_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizerDoc {
    max_iterations: usize,
    restarts: usize,
    initial_step: f64,
    gradient_tol: f64,
    loss_tol: f64,
}

impl Default for OptimizerDoc {
    fn default() -> Self {
        OptimizerDoc::from(&OptimizerSettings::default())
    }
}

impl From<&OptimizerSettings> for OptimizerDoc {
    fn from(s: &OptimizerSettings) -> Self {
        OptimizerDoc {
            max_iterations: s.max_iterations,
            restarts: s.restarts,
            initial_step: s.initial_step,
            gradient_tol: s.gradient_tol,
            loss_tol: s.loss_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PruningDoc {
    threshold: f64,
    order: OrderDoc,
}

impl Default for PruningDoc {
    fn default() -> Self {
        PruningDoc { threshold: PruningSettings::default().threshold, order: OrderDoc::AscendingWeight }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateDoc {
    name: String,
    #[serde(default = "default_task")]
    task: TaskDoc,
    vertices: Vec<VertexDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_label: Option<String>,
    #[serde(default)]
    target: Option<Vec<TermDoc>>,
    /// `[u, v]` for uncolored pairs, `[u, v, cu, cv]` for concrete edges; absent means the full graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial_edges: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constraints: Option<ConstraintsDoc>,
    #[serde(default)]
    optimizer: OptimizerDoc,
    #[serde(default)]
    pruning: PruningDoc,
    #[serde(default)]
    seed: u64,
}

fn default_task() -> TaskDoc {
    TaskDoc::Generation
}

/// Renders a search instruction template.
pub fn encode_search_template(config: &SearchConfig) -> Result<String, FormatError> {
    let target = config.target.state();
    let initial_edges = config.geometry.as_ref().map(|geometry| {
        geometry
            .iter()
            .map(|g| match *g {
                GeometryEdge::Uncolored { u, v } => vec![u, v],
                GeometryEdge::Colored { u, v, cu, cv } => vec![u, v, cu, cv],
            })
            .collect()
    });
    let constraints = (config.constraints != InitialConstraints::default()).then(|| ConstraintsDoc {
        excluded_pairs: config.constraints.excluded_pairs.iter().map(|&(u, v)| [u, v]).collect(),
        same_mode_only: config.constraints.same_mode_only,
    });
    let doc = TemplateDoc {
        name: config.name.clone(),
        task: match config.task {
            Task::Generation => TaskDoc::Generation,
            Task::Analyzer => TaskDoc::Analyzer,
        },
        vertices: config
            .roster
            .iter()
            .map(|v| VertexDoc { id: v.id, role: v.role, dimension: v.dimension, position: None })
            .collect(),
        target_label: Some(config.target.label().to_string()),
        target: Some(encode_terms(target.amplitudes(), "target")?),
        initial_edges,
        constraints,
        optimizer: OptimizerDoc::from(&config.optimizer),
        pruning: PruningDoc {
            threshold: config.pruning.threshold,
            order: match config.pruning.order {
                CandidateOrder::AscendingWeight => OrderDoc::AscendingWeight,
                CandidateOrder::Canonical => OrderDoc::Canonical,
            },
        },
        seed: config.seed,
    };
    render_document(&doc)
}

/// Parses a template into a search configuration. The target is normalized;
/// the initial geometry is kept as written (expand it with
/// [`crate::discovery::expand_uncolored_edges`]).
pub fn decode_search_template(doc: &str) -> Result<SearchConfig, FormatError> {
    let t: TemplateDoc = parse_document(doc)?;
    let roster: Vec<Vertex> =
        t.vertices.iter().map(|v| Vertex { id: v.id, role: v.role, dimension: v.dimension }).collect();
    for (i, v) in roster.iter().enumerate() {
        if v.id != i {
            return Err(FormatError::field(format!("vertices[{i}].id"), format!("expected id {i}, found {}", v.id)));
        }
        if v.dimension == 0 {
            return Err(FormatError::field(format!("vertices[{i}].dimension"), "dimension must be at least 1"));
        }
    }
    let task = match t.task {
        TaskDoc::Generation => Task::Generation,
        TaskDoc::Analyzer => Task::Analyzer,
    };

    let terms = t.target.as_deref().ok_or(FormatError::MissingTarget)?;
    if terms.is_empty() {
        return Err(FormatError::MissingTarget);
    }
    let terms = decode_terms(terms, "target")?;
    let dims = task.site_dims(&roster);
    let state = QuantumState::from_terms(dims.clone(), terms).map_err(|_| {
        FormatError::field("target", format!("kets must have one mode per {task} site, within dims {dims:?}"))
    })?;
    let label = t.target_label.clone().unwrap_or_else(|| "custom".to_string());
    let target = TargetState::new(label, &state).map_err(|e| FormatError::field("target", e.to_string()))?;

    let geometry = t
        .initial_edges
        .as_ref()
        .map(|entries| {
            entries
                .iter()
                .enumerate()
                .map(|(i, entry)| match entry.as_slice() {
                    [u, v] => Ok(GeometryEdge::Uncolored { u: *u, v: *v }),
                    [u, v, cu, cv] => Ok(GeometryEdge::Colored { u: *u, v: *v, cu: *cu, cv: *cv }),
                    _ => Err(FormatError::field(format!("initial_edges[{i}]"), "expected [u, v] or [u, v, cu, cv]")),
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    if let Some(geometry) = &geometry {
        for (i, g) in geometry.iter().enumerate() {
            let (u, v) = g.endpoints();
            if u >= roster.len() || v >= roster.len() || u == v {
                return Err(FormatError::field(format!("initial_edges[{i}]"), "invalid vertex reference"));
            }
            if let GeometryEdge::Colored { cu, cv, .. } = *g {
                if cu >= roster[u].dimension || cv >= roster[v].dimension {
                    return Err(FormatError::field(format!("initial_edges[{i}]"), "mode outside vertex dimension"));
                }
            }
        }
    }

    let constraints = t
        .constraints
        .as_ref()
        .map(|c| InitialConstraints {
            excluded_pairs: c.excluded_pairs.iter().map(|&[u, v]| (u.min(v), u.max(v))).collect(),
            same_mode_only: c.same_mode_only,
        })
        .unwrap_or_default();
    let optimizer = OptimizerSettings {
        max_iterations: t.optimizer.max_iterations,
        restarts: t.optimizer.restarts,
        initial_step: t.optimizer.initial_step,
        gradient_tol: t.optimizer.gradient_tol,
        loss_tol: t.optimizer.loss_tol,
    };
    let pruning = PruningSettings {
        threshold: t.pruning.threshold,
        order: match t.pruning.order {
            OrderDoc::AscendingWeight => CandidateOrder::AscendingWeight,
            OrderDoc::Canonical => CandidateOrder::Canonical,
        },
    };
    Ok(SearchConfig { name: t.name, roster, task, target, geometry, constraints, optimizer, pruning, seed: t.seed })
}

/// A search configuration whose initial graph is the edge set of `g`.
///
/// Vertex pairs carrying every mode combination become uncolored entries.
pub fn search_config_from_graph(g: &ColoredGraph, target: TargetState, task: Task) -> SearchConfig {
    let mut config = SearchConfig::new(g.name.clone(), g.vertices.clone(), task, target);
    config.geometry = Some(geometry_of(g));
    config
}
