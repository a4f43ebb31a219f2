//! Colored, complex-weighted multigraphs describing photon-pair experiments.
//!
//! Vertices are detectors (or ancillae / input modes), edges are pair sources
//! emitting one photon towards each endpoint. Each endpoint carries its own
//! mode index, so an edge is "bi-colored"; a single-color edge is `cu == cv`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Absolute tolerance used when comparing complex weights and amplitudes.
pub const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Detector,
    Ancilla,
    Input,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Detector => "detector",
            Role::Ancilla => "ancilla",
            Role::Input => "input",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub id: usize,
    pub role: Role,
    /// Number of local modes.
    pub dimension: usize,
}

impl Vertex {
    pub fn detector(id: usize, dimension: usize) -> Self {
        Vertex { id, role: Role::Detector, dimension }
    }

    /// Ancillae are single-mode unless overridden.
    pub fn ancilla(id: usize) -> Self {
        Vertex { id, role: Role::Ancilla, dimension: 1 }
    }

    pub fn input(id: usize, dimension: usize) -> Self {
        Vertex { id, role: Role::Input, dimension }
    }
}

/// A photon-pair source between `u` and `v` with mode `cu` at `u` and `cv` at `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub cu: usize,
    pub cv: usize,
    pub weight: Complex64,
}

impl Edge {
    pub fn new(u: usize, v: usize, cu: usize, cv: usize, weight: impl Into<Complex64>) -> Self {
        Edge { u, v, cu, cv, weight: weight.into() }
    }

    /// Builds an edge with endpoints swapped into `u < v` order, modes following their vertex.
    pub fn oriented(a: usize, b: usize, ca: usize, cb: usize, weight: impl Into<Complex64>) -> Self {
        if a <= b {
            Edge::new(a, b, ca, cb, weight)
        } else {
            Edge::new(b, a, cb, ca, weight)
        }
    }

    pub fn key(&self) -> EdgeKey {
        EdgeKey { u: self.u, v: self.v, cu: self.cu, cv: self.cv }
    }

    pub fn touches(&self, vertex: usize) -> bool {
        self.u == vertex || self.v == vertex
    }

    /// The mode this edge delivers to `vertex`, if it is an endpoint.
    pub fn mode_at(&self, vertex: usize) -> Option<usize> {
        if self.u == vertex {
            Some(self.cu)
        } else if self.v == vertex {
            Some(self.cv)
        } else {
            None
        }
    }

    pub fn other(&self, vertex: usize) -> Option<usize> {
        if self.u == vertex {
            Some(self.v)
        } else if self.v == vertex {
            Some(self.u)
        } else {
            None
        }
    }
}

/// Identity of an edge without its weight; orders edges canonically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey {
    pub u: usize,
    pub v: usize,
    pub cu: usize,
    pub cv: usize,
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.u, self.v, self.cu, self.cv)
    }
}

/// The experiment: role-tagged vertices plus colored weighted edges.
///
/// Fields are public so documents can be decoded into a graph that still
/// violates invariants; call [`validate_graph`] before trusting one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ColoredGraph {
    pub name: String,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    VertexIdMismatch { index: usize, id: usize },
    ZeroDimension { vertex: usize },
    BadEndpoint { edge: usize, vertex: usize },
    SelfLoop { edge: usize },
    ModeOutOfRange { edge: usize, vertex: usize, mode: usize, dimension: usize },
    DuplicateEdge { edge: usize, first: usize },
    EndpointOrder { edge: usize },
    NonFiniteWeight { edge: usize },
}

impl Violation {
    /// Short machine-friendly category name.
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::VertexIdMismatch { .. } => "vertex id mismatch",
            Violation::ZeroDimension { .. } => "zero dimension",
            Violation::BadEndpoint { .. } => "bad endpoint",
            Violation::SelfLoop { .. } => "self-loop",
            Violation::ModeOutOfRange { .. } => "mode out of range",
            Violation::DuplicateEdge { .. } => "duplicate edge",
            Violation::EndpointOrder { .. } => "endpoint order",
            Violation::NonFiniteWeight { .. } => "non-finite weight",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::VertexIdMismatch { index, id } => {
                write!(f, "vertex id mismatch: vertex at position {index} has id {id}")
            }
            Violation::ZeroDimension { vertex } => write!(f, "zero dimension: vertex {vertex}"),
            Violation::BadEndpoint { edge, vertex } => {
                write!(f, "bad endpoint: edge {edge} references missing vertex {vertex}")
            }
            Violation::SelfLoop { edge } => write!(f, "self-loop: edge {edge}"),
            Violation::ModeOutOfRange { edge, vertex, mode, dimension } => {
                write!(f, "mode out of range: edge {edge} uses mode {mode} at vertex {vertex} (dimension {dimension})")
            }
            Violation::DuplicateEdge { edge, first } => {
                write!(f, "duplicate edge: edge {edge} repeats edge {first}")
            }
            Violation::EndpointOrder { edge } => write!(f, "endpoint order: edge {edge} has u > v"),
            Violation::NonFiniteWeight { edge } => write!(f, "non-finite weight: edge {edge}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Reports every invariant violation of `g`. Violations are data, not faults.
pub fn validate_graph(g: &ColoredGraph) -> ValidationReport {
    let mut violations = Vec::new();
    for (index, vertex) in g.vertices.iter().enumerate() {
        if vertex.id != index {
            violations.push(Violation::VertexIdMismatch { index, id: vertex.id });
        }
        if vertex.dimension == 0 {
            violations.push(Violation::ZeroDimension { vertex: index });
        }
    }

    let mut seen = std::collections::HashMap::new();
    for (i, edge) in g.edges.iter().enumerate() {
        if edge.u == edge.v {
            violations.push(Violation::SelfLoop { edge: i });
        } else if edge.u > edge.v {
            violations.push(Violation::EndpointOrder { edge: i });
        }
        for (vertex, mode) in [(edge.u, edge.cu), (edge.v, edge.cv)] {
            match g.vertices.get(vertex) {
                None => violations.push(Violation::BadEndpoint { edge: i, vertex }),
                Some(vx) if mode >= vx.dimension => {
                    violations.push(Violation::ModeOutOfRange { edge: i, vertex, mode, dimension: vx.dimension })
                }
                Some(_) => {}
            }
        }
        if !edge.weight.re.is_finite() || !edge.weight.im.is_finite() {
            violations.push(Violation::NonFiniteWeight { edge: i });
        }
        if let Some(&first) = seen.get(&edge.key()) {
            violations.push(Violation::DuplicateEdge { edge: i, first });
        } else {
            seen.insert(edge.key(), i);
        }
    }
    ValidationReport { violations }
}

impl ColoredGraph {
    pub fn new(name: impl Into<String>, vertices: Vec<Vertex>, edges: Vec<Edge>) -> Self {
        ColoredGraph { name: name.into(), vertices, edges }
    }

    /// `n` detectors of equal dimension and no edges.
    pub fn with_detectors(name: impl Into<String>, n: usize, dimension: usize) -> Self {
        let vertices = (0..n).map(|id| Vertex::detector(id, dimension)).collect();
        ColoredGraph::new(name, vertices, Vec::new())
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.vertices.iter().map(|v| v.dimension).collect()
    }

    /// Ids of vertices with one of the given roles, ascending.
    pub fn vertices_with_role(&self, roles: &[Role]) -> Vec<usize> {
        self.vertices.iter().filter(|v| roles.contains(&v.role)).map(|v| v.id).collect()
    }

    /// Ids of the vertices that appear in state kets (everything but ancillae).
    pub fn state_sites(&self) -> Vec<usize> {
        self.vertices_with_role(&[Role::Detector, Role::Input])
    }

    /// Sorts edges into canonical `(u, v, cu, cv)` order.
    pub fn canonicalize(&mut self) {
        self.edges.sort_by_key(Edge::key);
    }

    pub fn is_canonical(&self) -> bool {
        self.edges.windows(2).all(|w| w[0].key().cmp(&w[1].key()) != Ordering::Greater)
    }

    pub fn edge_index(&self, key: EdgeKey) -> Option<usize> {
        self.edges.iter().position(|e| e.key() == key)
    }

    pub fn edge_keys(&self) -> BTreeSet<EdgeKey> {
        self.edges.iter().map(Edge::key).collect()
    }

    /// Returns a copy without the edge at `index`.
    pub fn without_edge(&self, index: usize) -> ColoredGraph {
        let mut g = self.clone();
        g.edges.remove(index);
        g
    }

    /// Multiplies every edge weight by `factor`.
    pub fn scaled(&self, factor: Complex64) -> ColoredGraph {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.weight *= factor;
        }
        g
    }
}
