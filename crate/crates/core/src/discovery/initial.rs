use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, Edge, EdgeKey, Vertex};

use super::Task;

/// Restrictions on which edges the fully connected start graph contains.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InitialConstraints {
    /// Vertex pairs `(u, v)`, `u < v`, that get no edges.
    pub excluded_pairs: BTreeSet<(usize, usize)>,
    /// Only single-color edges (`cu == cv`).
    pub same_mode_only: bool,
}

/// One entry of a search geometry: a concrete edge, or a vertex pair standing
/// for every mode combination between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeometryEdge {
    Colored { u: usize, v: usize, cu: usize, cv: usize },
    Uncolored { u: usize, v: usize },
}

impl GeometryEdge {
    pub fn endpoints(&self) -> (usize, usize) {
        match *self {
            GeometryEdge::Colored { u, v, .. } | GeometryEdge::Uncolored { u, v } => (u, v),
        }
    }
}

pub(crate) fn random_weight(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..=1.0), 0.0)
}

fn check_roster(roster: &[Vertex]) -> Result<()> {
    if roster.is_empty() {
        return Err(Error::InvalidConfig("vertex roster is empty".into()));
    }
    for (i, v) in roster.iter().enumerate() {
        if v.id != i {
            return Err(Error::InvalidConfig(format!("vertex at position {i} has id {}", v.id)));
        }
        if v.dimension == 0 {
            return Err(Error::InvalidConfig(format!("vertex {i} has dimension 0")));
        }
    }
    Ok(())
}

fn weighted_graph(roster: &[Vertex], keys: BTreeSet<EdgeKey>, seed: u64) -> ColoredGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = keys.into_iter().map(|k| Edge::new(k.u, k.v, k.cu, k.cv, random_weight(&mut rng))).collect();
    ColoredGraph::new("initial", roster.to_vec(), edges)
}

/// Every edge `(u, v, cu, cv)` the roster and constraints allow, with weights
/// drawn uniformly from `[-1, 1]` by a generator seeded with `seed`.
pub fn build_initial_graph(
    roster: &[Vertex],
    constraints: &InitialConstraints,
    task: Task,
    seed: u64,
) -> Result<ColoredGraph> {
    check_roster(roster)?;
    if task == Task::Generation && roster.len() % 2 == 1 {
        return Err(Error::OddVertexCount(roster.len()));
    }
    let mut keys = BTreeSet::new();
    for a in roster {
        for b in &roster[a.id + 1..] {
            if constraints.excluded_pairs.contains(&(a.id, b.id)) {
                continue;
            }
            for cu in 0..a.dimension {
                for cv in 0..b.dimension {
                    if !constraints.same_mode_only || cu == cv {
                        keys.insert(EdgeKey { u: a.id, v: b.id, cu, cv });
                    }
                }
            }
        }
    }
    Ok(weighted_graph(roster, keys, seed))
}

/// Turns a geometry into a concrete graph: uncolored pairs expand to all
/// `dim(u) * dim(v)` mode combinations, duplicates collapse.
pub fn expand_uncolored_edges(roster: &[Vertex], geometry: &[GeometryEdge], seed: u64) -> Result<ColoredGraph> {
    check_roster(roster)?;
    let dim = |x: usize| {
        roster
            .get(x)
            .map(|v| v.dimension)
            .ok_or_else(|| Error::InvalidConfig(format!("geometry references missing vertex {x}")))
    };
    let mut keys = BTreeSet::new();
    for entry in geometry {
        let (a, b) = entry.endpoints();
        if a == b {
            return Err(Error::InvalidConfig(format!("geometry edge ({a}, {a}) is a self-loop")));
        }
        let (da, db) = (dim(a)?, dim(b)?);
        match *entry {
            GeometryEdge::Colored { u, v, cu, cv } => {
                if cu >= da || cv >= db {
                    return Err(Error::InvalidConfig(format!(
                        "geometry edge ({u}, {v}, {cu}, {cv}) has a mode outside the vertex dimensions"
                    )));
                }
                let e = Edge::oriented(u, v, cu, cv, 0.0);
                keys.insert(e.key());
            }
            GeometryEdge::Uncolored { .. } => {
                for ca in 0..da {
                    for cb in 0..db {
                        keys.insert(Edge::oriented(a, b, ca, cb, 0.0).key());
                    }
                }
            }
        }
    }
    Ok(weighted_graph(roster, keys, seed))
}

/// Collapses a graph into geometry entries, marking pairs that carry every
/// mode combination as uncolored.
pub fn geometry_of(g: &ColoredGraph) -> Vec<GeometryEdge> {
    let mut per_pair: BTreeMap<(usize, usize), Vec<EdgeKey>> = BTreeMap::new();
    for e in &g.edges {
        per_pair.entry((e.u, e.v)).or_default().push(e.key());
    }
    let mut out = Vec::new();
    for ((u, v), mut keys) in per_pair {
        keys.sort();
        keys.dedup();
        let full = match (g.vertices.get(u), g.vertices.get(v)) {
            (Some(a), Some(b)) => keys.len() == a.dimension * b.dimension && keys.len() > 1,
            _ => false,
        };
        if full {
            out.push(GeometryEdge::Uncolored { u, v });
        } else {
            out.extend(keys.into_iter().map(|k| GeometryEdge::Colored { u: k.u, v: k.v, cu: k.cu, cv: k.cv }));
        }
    }
    out
}
