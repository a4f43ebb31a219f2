//! Kamada-Kawai style 3D layout: place vertices so Euclidean distances
//! approximate graph distances.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::ColoredGraph;

pub type Point = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutSettings {
    pub seed: u64,
    /// Maximum number of full sweeps over the vertices.
    pub max_iters: usize,
    /// Stop once a sweep lowers the stress by less than this.
    pub tol: f64,
}

impl Default for LayoutSettings {
    fn default() -> Self {
        LayoutSettings { seed: 0, max_iters: 1000, tol: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub positions: Vec<Point>,
    pub stress: f64,
    /// Stress before the first sweep, then after each sweep.
    pub trace: Vec<f64>,
}

/// All-pairs BFS distances on the simple graph underlying `g`.
///
/// Parallel edges count once and colors are ignored. Unreachable pairs get
/// the largest finite distance plus one.
pub fn graph_distances(g: &ColoredGraph) -> Vec<Vec<f64>> {
    let n = g.num_vertices();
    let mut adj = vec![Vec::new(); n];
    for e in &g.edges {
        if e.u < n && e.v < n && e.u != e.v {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    let mut hops = vec![vec![None; n]; n];
    for (src, row) in hops.iter_mut().enumerate() {
        let mut queue = VecDeque::from([src]);
        row[src] = Some(0usize);
        while let Some(x) = queue.pop_front() {
            let next = row[x].unwrap() + 1;
            for &y in &adj[x] {
                if row[y].is_none() {
                    row[y] = Some(next);
                    queue.push_back(y);
                }
            }
        }
    }
    let max_finite = hops.iter().flatten().flatten().copied().max().unwrap_or(0);
    hops.into_iter().map(|row| row.into_iter().map(|d| d.unwrap_or(max_finite + 1) as f64).collect()).collect()
}

fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// `sum_{i<j} (|x_i - x_j| - d_ij)^2 / d_ij^2`.
pub fn stress(positions: &[Point], distances: &[Vec<f64>]) -> Result<f64> {
    let n = positions.len();
    if distances.len() != n || distances.iter().any(|row| row.len() != n) {
        let found = distances.iter().map(Vec::len).collect();
        return Err(Error::ShapeMismatch { expected: vec![n; n], found });
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = distances[i][j];
            if d > 0.0 {
                total += (dist(&positions[i], &positions[j]) - d).powi(2) / (d * d);
            }
        }
    }
    Ok(total)
}

/// Stress terms involving vertex `i` when it sits at `at`.
fn local_stress(positions: &[Point], distances: &[Vec<f64>], i: usize, at: &Point) -> f64 {
    positions
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i && distances[i][j] > 0.0)
        .map(|(j, p)| {
            let d = distances[i][j];
            (dist(at, p) - d).powi(2) / (d * d)
        })
        .sum()
}

fn random_in_unit_ball(rng: &mut ChaCha8Rng) -> Point {
    loop {
        let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if p.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            return p;
        }
    }
}

/// Minimizes layout stress by per-vertex gradient steps with backtracking.
///
/// Each accepted step lowers the stress, so the trace never increases. The
/// result is translated so its centroid is the origin.
pub fn kamada_kawai_3d(g: &ColoredGraph, settings: &LayoutSettings) -> Layout {
    let n = g.num_vertices();
    let distances = graph_distances(g);
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut positions: Vec<Point> = (0..n).map(|_| random_in_unit_ball(&mut rng)).collect();
    if n == 1 {
        positions[0] = [0.0; 3];
    }

    let mut current = stress(&positions, &distances).expect("square distance matrix");
    let mut trace = vec![current];
    for _ in 0..settings.max_iters {
        if current <= 0.0 {
            break;
        }
        for i in 0..n {
            let mut grad = [0.0; 3];
            let mut curvature = 0.0;
            for j in (0..n).filter(|&j| j != i) {
                let d = distances[i][j];
                let r = dist(&positions[i], &positions[j]);
                if d <= 0.0 || r == 0.0 {
                    continue;
                }
                let k = 1.0 / (d * d);
                let coeff = 2.0 * k * (r - d) / r;
                for c in 0..3 {
                    grad[c] += coeff * (positions[i][c] - positions[j][c]);
                }
                curvature += 2.0 * k;
            }
            let grad_sqr: f64 = grad.iter().map(|g| g * g).sum();
            if grad_sqr == 0.0 || curvature == 0.0 {
                continue;
            }
            let before = local_stress(&positions, &distances, i, &positions[i]);
            let mut step = 1.0 / curvature;
            while step > 1e-12 {
                let trial = [
                    positions[i][0] - step * grad[0],
                    positions[i][1] - step * grad[1],
                    positions[i][2] - step * grad[2],
                ];
                if local_stress(&positions, &distances, i, &trial) <= before - 1e-4 * step * grad_sqr {
                    positions[i] = trial;
                    break;
                }
                step *= 0.5;
            }
        }
        let next = stress(&positions, &distances).expect("square distance matrix");
        // Guard against rounding making the recomputed total tick upwards.
        let next = next.min(current);
        trace.push(next);
        let improvement = current - next;
        current = next;
        if improvement < settings.tol {
            break;
        }
    }

    if n > 0 {
        let mut centroid = [0.0; 3];
        for p in &positions {
            for c in 0..3 {
                centroid[c] += p[c] / n as f64;
            }
        }
        for p in &mut positions {
            for c in 0..3 {
                p[c] -= centroid[c];
            }
        }
    }
    let stress = stress(&positions, &distances).expect("square distance matrix");
    Layout { positions, stress, trace }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{bell_graph, square_graph};
    use crate::graph::Edge;

    #[test]
    fn distance_conventions() {
        let d = graph_distances(&square_graph([1.0; 4]));
        assert_eq!(d[0][2], 2.0);
        assert_eq!(d[0][1], 1.0);
        assert_eq!(graph_distances(&bell_graph())[0][1], 1.0);

        let mut g = ColoredGraph::with_detectors("two", 4, 1);
        g.edges = vec![Edge::new(0, 1, 0, 0, 1.0), Edge::new(2, 3, 0, 0, 1.0)];
        let d = graph_distances(&g);
        assert_eq!(d[0][2], 2.0);
        assert_eq!(d[1][3], 2.0);
    }

    #[test]
    fn stress_examples() {
        let d = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(stress(&[[0.0; 3], [1.0, 0.0, 0.0]], &d).unwrap(), 0.0);
        assert_eq!(stress(&[[0.0; 3], [0.0; 3]], &d).unwrap(), 1.0);
        assert_eq!(stress(&[[0.0; 3], [2.0, 0.0, 0.0]], &d).unwrap(), 1.0);
        assert!(stress(&[[0.0; 3]], &d).is_err());
    }

    #[test]
    fn k2_reaches_unit_distance() {
        let layout = kamada_kawai_3d(&bell_graph(), &LayoutSettings::default());
        assert!((dist(&layout.positions[0], &layout.positions[1]) - 1.0).abs() < 1e-3);
        assert!(layout.stress < 1e-6);
    }

    #[test]
    fn single_vertex_sits_at_origin() {
        let layout = kamada_kawai_3d(&ColoredGraph::with_detectors("one", 1, 1), &LayoutSettings::default());
        assert_eq!(layout.positions, vec![[0.0; 3]]);
        assert_eq!(layout.stress, 0.0);
    }

    #[test]
    fn empty_graph_has_empty_layout() {
        let layout = kamada_kawai_3d(&ColoredGraph::default(), &LayoutSettings::default());
        assert!(layout.positions.is_empty());
        assert_eq!(layout.stress, 0.0);
    }

    #[test]
    fn square_becomes_a_square() {
        let layout = kamada_kawai_3d(&square_graph([1.0; 4]), &LayoutSettings { seed: 3, ..Default::default() });
        // Best planar square: side s minimizing 4(s-1)^2 + 2(s*sqrt2 - 2)^2 / 4.
        let s = (8.0 + 2.0 * 2f64.sqrt()) / 10.0;
        let optimum = 4.0 * (s - 1.0).powi(2) + 0.5 * (s * 2f64.sqrt() - 2.0).powi(2);
        assert!((layout.stress - optimum).abs() < 1e-3, "stress {} vs {optimum}", layout.stress);
        assert!(layout.trace.windows(2).all(|w| w[1] <= w[0]));
        let centroid: f64 = layout.positions.iter().map(|p| p[0] + p[1] + p[2]).sum();
        assert!(centroid.abs() < 1e-12);
    }
}
