//! Perfect matchings, their amplitudes, and interference certificates.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, WEIGHT_TOL};
use crate::state::{matching_ket, Ket};

/// Edge indices (ascending) of a perfect matching of some parent graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PerfectMatching {
    edges: Vec<usize>,
}

impl PerfectMatching {
    /// Wraps an edge index set; sorts it. Coverage is not checked here.
    pub fn new(mut edges: Vec<usize>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        PerfectMatching { edges }
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.edges.binary_search(&edge).is_ok()
    }

    /// True if the member edges cover every vertex of `g` exactly once.
    pub fn is_perfect_in(&self, g: &ColoredGraph) -> bool {
        let mut covered = vec![false; g.num_vertices()];
        for &ei in &self.edges {
            let Some(e) = g.edges.get(ei) else { return false };
            if e.u == e.v {
                return false;
            }
            for x in [e.u, e.v] {
                match covered.get_mut(x) {
                    Some(slot) if !*slot => *slot = true,
                    _ => return false,
                }
            }
        }
        covered.iter().all(|&c| c)
    }

    pub(crate) fn amplitude_unchecked(&self, g: &ColoredGraph) -> Complex64 {
        self.edges.iter().map(|&ei| g.edges[ei].weight).product()
    }
}

/// Incident edge lists for every vertex, skipping edges with missing endpoints or self-loops.
fn incidence(g: &ColoredGraph) -> Vec<Vec<usize>> {
    let n = g.num_vertices();
    let mut inc = vec![Vec::new(); n];
    for (i, e) in g.edges.iter().enumerate() {
        if e.u != e.v && e.u < n && e.v < n {
            inc[e.u].push(i);
            inc[e.v].push(i);
        }
    }
    inc
}

/// All perfect matchings of `g`, sorted lexicographically by member edge indices.
///
/// Branches on the lowest-id uncovered vertex over its incident edges.
pub fn enumerate_perfect_matchings(g: &ColoredGraph) -> Vec<PerfectMatching> {
    let n = g.num_vertices();
    if n % 2 == 1 {
        return Vec::new();
    }
    let inc = incidence(g);
    let mut covered = vec![false; n];
    let mut chosen = Vec::with_capacity(n / 2);
    let mut out = Vec::new();

    fn recurse(
        g: &ColoredGraph,
        inc: &[Vec<usize>],
        covered: &mut [bool],
        chosen: &mut Vec<usize>,
        out: &mut Vec<PerfectMatching>,
    ) {
        let Some(v) = covered.iter().position(|&c| !c) else {
            out.push(PerfectMatching::new(chosen.clone()));
            return;
        };
        covered[v] = true;
        for &ei in &inc[v] {
            let e = &g.edges[ei];
            let w = if e.u == v { e.v } else { e.u };
            if covered[w] {
                continue;
            }
            covered[w] = true;
            chosen.push(ei);
            recurse(g, inc, covered, chosen, out);
            chosen.pop();
            covered[w] = false;
        }
        covered[v] = false;
    }

    recurse(g, &inc, &mut covered, &mut chosen, &mut out);
    out.sort();
    out
}

/// Product of the member edge weights.
pub fn matching_amplitude(g: &ColoredGraph, pm: &PerfectMatching) -> Result<Complex64> {
    if !pm.is_perfect_in(g) {
        return Err(Error::NotPerfectMatching);
    }
    Ok(pm.amplitude_unchecked(g))
}

/// A closed alternating walk; `edges[i]` joins `vertices[i]` and `vertices[(i + 1) % len]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Disjoint even cycles formed by the edges lying in exactly one of the two matchings.
///
/// Each cycle starts at its lowest vertex and leaves it along the `pm1` edge.
pub fn symmetric_difference_cycles(g: &ColoredGraph, pm1: &PerfectMatching, pm2: &PerfectMatching) -> Vec<Cycle> {
    let a: BTreeSet<usize> = pm1.edges().iter().copied().collect();
    let b: BTreeSet<usize> = pm2.edges().iter().copied().collect();
    let n = g.num_vertices();
    let mut via_first = vec![None; n];
    let mut via_second = vec![None; n];
    for &ei in a.difference(&b) {
        let e = &g.edges[ei];
        via_first[e.u] = Some(ei);
        via_first[e.v] = Some(ei);
    }
    for &ei in b.difference(&a) {
        let e = &g.edges[ei];
        via_second[e.u] = Some(ei);
        via_second[e.v] = Some(ei);
    }

    let mut visited = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if visited[start] || via_first[start].is_none() {
            continue;
        }
        let mut cycle = Cycle { vertices: Vec::new(), edges: Vec::new() };
        let mut at = start;
        let mut use_first = true;
        loop {
            visited[at] = true;
            let step = if use_first { via_first[at] } else { via_second[at] };
            // A vertex missing its partner edge means the inputs were not both perfect.
            let Some(ei) = step else { break };
            cycle.vertices.push(at);
            cycle.edges.push(ei);
            at = g.edges[ei].other(at).expect("edge is incident");
            use_first = !use_first;
            if at == start {
                break;
            }
        }
        cycles.push(cycle);
    }
    cycles
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contribution {
    pub matching: PerfectMatching,
    pub amplitude: Complex64,
}

/// Two contributions to one ket whose amplitudes point in opposing directions.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferencePair {
    pub first: usize,
    pub second: usize,
    pub cycles: Vec<Cycle>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CancellationReport {
    pub ket: Ket,
    pub contributions: Vec<Contribution>,
    pub net: Complex64,
    pub interference: Vec<InterferencePair>,
}

impl CancellationReport {
    /// Contributions exist but sum to zero.
    pub fn is_cancelled(&self) -> bool {
        let scale: f64 = self.contributions.iter().map(|c| c.amplitude.norm()).sum();
        !self.contributions.is_empty() && self.net.norm() <= WEIGHT_TOL * scale.max(1.0)
    }
}

/// Every matching producing `ket` (over non-ancilla vertices), the net amplitude,
/// and the symmetric-difference cycles of each amplitude-opposing pair.
pub fn find_cancellations(g: &ColoredGraph, ket: &Ket) -> Result<CancellationReport> {
    cancellations_over_sites(g, ket, &g.state_sites())
}

pub(crate) fn cancellations_over_sites(g: &ColoredGraph, ket: &Ket, sites: &[usize]) -> Result<CancellationReport> {
    crate::state::check_endpoints(g)?;
    let mut contributions = Vec::new();
    for pm in enumerate_perfect_matchings(g) {
        if &matching_ket(g, &pm, sites)? == ket {
            let amplitude = pm.amplitude_unchecked(g);
            contributions.push(Contribution { matching: pm, amplitude });
        }
    }
    let net = contributions.iter().map(|c| c.amplitude).sum();
    let mut interference = Vec::new();
    for i in 0..contributions.len() {
        for j in i + 1..contributions.len() {
            let (x, y) = (contributions[i].amplitude, contributions[j].amplitude);
            if (x.conj() * y).re < 0.0 {
                interference.push(InterferencePair {
                    first: i,
                    second: j,
                    cycles: symmetric_difference_cycles(g, &contributions[i].matching, &contributions[j].matching),
                });
            }
        }
    }
    Ok(CancellationReport { ket: ket.clone(), contributions, net, interference })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn square(weights: [f64; 4]) -> ColoredGraph {
        let mut g = ColoredGraph::with_detectors("square", 4, 1);
        g.edges = vec![
            Edge::new(0, 1, 0, 0, weights[0]),
            Edge::new(1, 2, 0, 0, weights[1]),
            Edge::new(2, 3, 0, 0, weights[2]),
            Edge::new(0, 3, 0, 0, weights[3]),
        ];
        g
    }

    fn complete(n: usize) -> ColoredGraph {
        let mut g = ColoredGraph::with_detectors("k", n, 1);
        for u in 0..n {
            for v in u + 1..n {
                g.edges.push(Edge::new(u, v, 0, 0, 1.0));
            }
        }
        g
    }

    #[test]
    fn square_has_two_matchings() {
        let pms = enumerate_perfect_matchings(&square([1.0; 4]));
        assert_eq!(pms, vec![PerfectMatching::new(vec![0, 2]), PerfectMatching::new(vec![1, 3])]);
    }

    #[test]
    fn three_vertices_have_none() {
        assert!(enumerate_perfect_matchings(&complete(3)).is_empty());
    }

    #[test]
    fn k6_has_fifteen() {
        let pms = enumerate_perfect_matchings(&complete(6));
        assert_eq!(pms.len(), 15);
        assert!(pms.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn empty_graph_has_one_empty_matching() {
        let g = ColoredGraph::default();
        assert_eq!(enumerate_perfect_matchings(&g), vec![PerfectMatching::new(vec![])]);
    }

    #[test]
    fn amplitude_examples() {
        let mut g = square([0.5, 1.0, -1.0, 1.0]);
        let pm = PerfectMatching::new(vec![0, 2]);
        assert_eq!(matching_amplitude(&g, &pm).unwrap(), Complex64::new(-0.5, 0.0));

        g.edges[1].weight = Complex64::new(0.0, 0.0);
        assert_eq!(matching_amplitude(&g, &PerfectMatching::new(vec![1, 3])).unwrap(), Complex64::new(0.0, 0.0));

        g.edges[0].weight = Complex64::i();
        g.edges[2].weight = Complex64::i();
        assert_eq!(matching_amplitude(&g, &pm).unwrap(), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn amplitude_rejects_non_matchings() {
        let g = square([1.0; 4]);
        assert_eq!(matching_amplitude(&g, &PerfectMatching::new(vec![0, 1])), Err(Error::NotPerfectMatching));
        assert_eq!(matching_amplitude(&g, &PerfectMatching::new(vec![0])), Err(Error::NotPerfectMatching));
        assert_eq!(matching_amplitude(&g, &PerfectMatching::new(vec![0, 9])), Err(Error::NotPerfectMatching));
    }

    #[test]
    fn square_matchings_form_one_four_cycle() {
        let g = square([1.0; 4]);
        let pms = enumerate_perfect_matchings(&g);
        let cycles = symmetric_difference_cycles(&g, &pms[0], &pms[1]);
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].vertices, vec![0, 1, 2, 3]);
        assert_eq!(cycles[0].edges, vec![0, 1, 2, 3]);
        assert!(symmetric_difference_cycles(&g, &pms[0], &pms[0]).is_empty());
    }

    #[test]
    fn parallel_edges_form_two_cycles() {
        let mut g = ColoredGraph::with_detectors("bell", 2, 2);
        g.edges = vec![Edge::new(0, 1, 0, 0, 1.0), Edge::new(0, 1, 1, 1, 1.0)];
        let cycles = symmetric_difference_cycles(&g, &PerfectMatching::new(vec![0]), &PerfectMatching::new(vec![1]));
        assert_eq!(cycles, vec![Cycle { vertices: vec![0, 1], edges: vec![0, 1] }]);
    }

    #[test]
    fn negative_square_cancels() {
        let g = square([1.0, 1.0, 1.0, -1.0]);
        let report = find_cancellations(&g, &"0000".parse().unwrap()).unwrap();
        assert_eq!(report.contributions.len(), 2);
        assert_eq!(report.contributions[0].amplitude, Complex64::new(1.0, 0.0));
        assert_eq!(report.contributions[1].amplitude, Complex64::new(-1.0, 0.0));
        assert_eq!(report.net, Complex64::new(0.0, 0.0));
        assert!(report.is_cancelled());
        assert_eq!(report.interference.len(), 1);
        assert_eq!(report.interference[0].cycles.len(), 1);
        assert_eq!(report.interference[0].cycles[0].len(), 4);
    }

    #[test]
    fn bell_kets() {
        let mut g = ColoredGraph::with_detectors("bell", 2, 2);
        g.edges = vec![Edge::new(0, 1, 0, 0, 1.0), Edge::new(0, 1, 1, 1, 1.0)];
        let r = find_cancellations(&g, &"00".parse().unwrap()).unwrap();
        assert_eq!(r.contributions.len(), 1);
        assert_eq!(r.net, Complex64::new(1.0, 0.0));
        assert!(r.interference.is_empty());
        assert!(!r.is_cancelled());

        let r = find_cancellations(&g, &"01".parse().unwrap()).unwrap();
        assert!(r.contributions.is_empty());
        assert_eq!(r.net, Complex64::new(0.0, 0.0));
        assert!(!r.is_cancelled());
    }
}
