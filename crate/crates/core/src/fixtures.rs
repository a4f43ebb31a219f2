//! Small reference graphs used throughout tests, docs and the CLI.

use crate::graph::{ColoredGraph, Edge, Vertex};

/// Four single-mode detectors joined in a cycle: two perfect matchings.
pub fn square_graph(weights: [f64; 4]) -> ColoredGraph {
    let mut g = ColoredGraph::with_detectors("square", 4, 1);
    g.edges = vec![
        Edge::new(0, 1, 0, 0, weights[0]),
        Edge::new(0, 3, 0, 0, weights[3]),
        Edge::new(1, 2, 0, 0, weights[1]),
        Edge::new(2, 3, 0, 0, weights[2]),
    ];
    g
}

/// Two qubit detectors joined by `|00>` and `|11>` sources.
pub fn bell_graph() -> ColoredGraph {
    let mut g = ColoredGraph::with_detectors("bell", 2, 2);
    g.edges = vec![Edge::new(0, 1, 0, 0, 1.0), Edge::new(0, 1, 1, 1, 1.0)];
    g
}

/// Four-edge graph producing the 4-particle 2-dimensional GHZ state.
pub fn ghz42_minimal() -> ColoredGraph {
    let mut g = ColoredGraph::with_detectors("ghz42", 4, 2);
    g.edges = vec![
        Edge::new(0, 1, 0, 0, 1.0),
        Edge::new(0, 3, 1, 1, 1.0),
        Edge::new(1, 2, 1, 1, 1.0),
        Edge::new(2, 3, 0, 0, 1.0),
    ];
    g
}

/// Two input modes joined by `(0,0)` and `(1,1)` edges of the given weights.
pub fn bell_analyzer(w00: f64, w11: f64) -> ColoredGraph {
    ColoredGraph::new(
        "bell-analyzer",
        vec![Vertex::input(0, 2), Vertex::input(1, 2)],
        vec![Edge::new(0, 1, 0, 0, w00), Edge::new(0, 1, 1, 1, w11)],
    )
}

/// `n` single-mode detectors, every pair joined by one unit-weight edge.
pub fn complete_graph(n: usize) -> ColoredGraph {
    let mut g = ColoredGraph::with_detectors(format!("K{n}"), n, 1);
    for u in 0..n {
        for v in u + 1..n {
            g.edges.push(Edge::new(u, v, 0, 0, 1.0));
        }
    }
    g
}
