use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::graph::{ColoredGraph, Edge, Vertex};
use crate::layout::Point;
use crate::state::Ket;

use super::{
    check_finite, decode_terms, encode_terms, parse_document, render_document, ComplexDoc, FormatError, TermDoc,
    VertexDoc,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    u: usize,
    v: usize,
    cu: usize,
    cv: usize,
    weight: ComplexDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    name: String,
    vertices: Vec<VertexDoc>,
    edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<Vec<TermDoc>>,
}

/// A graph plus the optional per-vertex scene positions and an optional
/// attached target (unnormalized `(ket, amplitude)` terms).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraphFile {
    pub graph: ColoredGraph,
    /// One slot per vertex.
    pub positions: Vec<Option<Point>>,
    pub target: Option<Vec<(Ket, Complex64)>>,
}

impl GraphFile {
    pub fn new(graph: ColoredGraph) -> Self {
        let positions = vec![None; graph.num_vertices()];
        GraphFile { graph, positions, target: None }
    }

    pub fn with_positions(mut self, positions: &[Point]) -> Self {
        self.positions = positions.iter().copied().map(Some).collect();
        self
    }
}

/// Renders the canonical document: vertices by id, edges in `(u, v, cu, cv)` order.
pub fn encode_graph(file: &GraphFile) -> Result<String, FormatError> {
    let mut graph = file.graph.clone();
    graph.canonicalize();
    let mut vertices: Vec<(usize, &Vertex)> = graph.vertices.iter().enumerate().collect();
    vertices.sort_by_key(|(_, v)| v.id);

    let vertices = vertices
        .into_iter()
        .map(|(slot, v)| {
            let position = file.positions.get(slot).copied().flatten();
            if let Some(p) = position {
                check_finite(&format!("vertices[{slot}].position"), &p)?;
            }
            Ok(VertexDoc { id: v.id, role: v.role, dimension: v.dimension, position })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    let edges = graph
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            check_finite(&format!("edges[{i}].weight"), &[e.weight.re, e.weight.im])?;
            Ok(EdgeDoc { u: e.u, v: e.v, cu: e.cu, cv: e.cv, weight: e.weight.into() })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    let target = match &file.target {
        Some(terms) => Some(encode_terms(terms.iter().map(|(k, a)| (k, a)), "target")?),
        None => None,
    };
    render_document(&GraphDoc { name: graph.name.clone(), vertices, edges, target })
}

/// Parses a graph document. Only structure is checked here; graph invariants
/// (endpoints, modes, duplicates) are left to [`crate::graph::validate_graph`].
pub fn decode_graph(doc: &str) -> Result<GraphFile, FormatError> {
    let parsed: GraphDoc = parse_document(doc)?;
    let mut positions = Vec::with_capacity(parsed.vertices.len());
    let mut vertices = Vec::with_capacity(parsed.vertices.len());
    for v in parsed.vertices {
        positions.push(v.position);
        vertices.push(Vertex { id: v.id, role: v.role, dimension: v.dimension });
    }
    let edges = parsed.edges.into_iter().map(|e| Edge::new(e.u, e.v, e.cu, e.cv, Complex64::from(e.weight))).collect();
    let target = parsed.target.as_deref().map(|t| decode_terms(t, "target")).transpose()?;
    Ok(GraphFile { graph: ColoredGraph::new(parsed.name, vertices, edges), positions, target })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::ghz42_minimal;
    use crate::graph::validate_graph;
    use crate::matching::enumerate_perfect_matchings;

    #[test]
    fn ghz_graph_round_trip() {
        let file = GraphFile::new(ghz42_minimal());
        let doc = encode_graph(&file).unwrap();
        let back = decode_graph(&doc).unwrap();
        assert_eq!(back.graph, ghz42_minimal());
        assert_eq!(back.graph.num_vertices(), 4);
        assert_eq!(back.graph.num_edges(), 4);
        assert_eq!(encode_graph(&back).unwrap(), doc);
    }

    #[test]
    fn document_layout_is_stable() {
        let mut g = ColoredGraph::with_detectors("pair", 2, 2);
        g.edges.push(Edge::new(0, 1, 1, 0, Complex64::new(-0.5, 0.25)));
        let mut file = GraphFile::new(g).with_positions(&[[0.0, 0.5, -1.0], [1.0, 0.0, 0.0]]);
        file.target = Some(vec![("10".parse().unwrap(), Complex64::new(1.0, 0.0))]);
        let doc = encode_graph(&file).unwrap();
        let expected = r#"{
  "name": "pair",
  "vertices": [
    {
      "id": 0,
      "role": "detector",
      "dimension": 2,
      "position": [
        0.0,
        0.5,
        -1.0
      ]
    },
    {
      "id": 1,
      "role": "detector",
      "dimension": 2,
      "position": [
        1.0,
        0.0,
        0.0
      ]
    }
  ],
  "edges": [
    {
      "u": 0,
      "v": 1,
      "cu": 1,
      "cv": 0,
      "weight": {
        "re": -0.5,
        "im": 0.25
      }
    }
  ],
  "target": [
    {
      "ket": "10",
      "amplitude": {
        "re": 1.0,
        "im": 0.0
      }
    }
  ]
}
"#;
        assert_eq!(doc, expected);
        assert_eq!(decode_graph(&doc).unwrap(), file);
    }

    #[test]
    fn invalid_modes_decode_but_fail_validation() {
        let doc = r#"{"name": "bad", "vertices": [{"id": 0, "role": "detector", "dimension": 2},
            {"id": 1, "role": "detector", "dimension": 2}],
            "edges": [{"u": 0, "v": 1, "cu": 5, "cv": 0, "weight": {"re": 1.0, "im": 0.0}}]}"#;
        let file = decode_graph(doc).unwrap();
        assert!(!validate_graph(&file.graph).is_ok());
    }

    #[test]
    fn empty_edge_list() {
        let doc = r#"{"name": "e", "vertices": [{"id": 0, "role": "ancilla", "dimension": 1},
            {"id": 1, "role": "input", "dimension": 3}], "edges": []}"#;
        let file = decode_graph(doc).unwrap();
        assert!(validate_graph(&file.graph).is_ok());
        assert!(enumerate_perfect_matchings(&file.graph).is_empty());
    }

    #[test]
    fn parse_errors_carry_position() {
        let doc = "{\n  \"name\": \"x\",\n  \"vertices\": [{\"id\": 0, \"role\": \"photon\", \"dimension\": 2}],\n  \"edges\": []\n}";
        match decode_graph(doc) {
            Err(FormatError::Parse { path, line, .. }) => {
                assert_eq!(path, "vertices[0].role");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(decode_graph("").is_err());
        assert!(decode_graph("{} trailing").is_err());
        assert!(matches!(
            decode_graph(
                r#"{"name":"x","vertices":[],"edges":[],"target":[{"ket":"0?","amplitude":{"re":1,"im":0}}]}"#
            ),
            Err(FormatError::Field { .. })
        ));
    }

    #[test]
    fn encode_rejects_non_finite() {
        let mut g = ColoredGraph::with_detectors("nan", 2, 1);
        g.edges.push(Edge::new(0, 1, 0, 0, f64::INFINITY));
        assert!(matches!(encode_graph(&GraphFile::new(g)), Err(FormatError::Encode(_))));
    }

    #[test]
    fn encode_canonicalizes_edge_order() {
        let mut g = ghz42_minimal();
        g.edges.reverse();
        let doc = encode_graph(&GraphFile::new(g)).unwrap();
        assert_eq!(doc, encode_graph(&GraphFile::new(ghz42_minimal())).unwrap());
    }
}
