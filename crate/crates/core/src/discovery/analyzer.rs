//! Measurement graphs: input-mode vertices stand in for the incoming state,
//! every other vertex only has to be covered.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, Role};
use crate::state::{normalize_state, state_over_sites, Ket, QuantumState};
use crate::targets::TargetState;

/// Coincidence amplitude for each basis ket of the input vertices (ascending id).
pub fn analyzer_functional(g: &ColoredGraph) -> Result<QuantumState> {
    let inputs = g.vertices_with_role(&[Role::Input]);
    if inputs.is_empty() {
        return Err(Error::NoInputVertices);
    }
    state_over_sites(g, &inputs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzerReport {
    pub is_valid: bool,
    /// Kets whose normalized amplitude deviates from the projector by more than the tolerance.
    pub offending: Vec<(Ket, Complex64)>,
    /// `lambda` with functional ~ `lambda * conj(target)`, when the functional is nonzero.
    pub scale: Option<Complex64>,
    /// Why the check could not be carried out, if it could not.
    pub reason: Option<String>,
}

impl AnalyzerReport {
    fn rejected(reason: String) -> Self {
        AnalyzerReport { is_valid: false, offending: Vec::new(), scale: None, reason: Some(reason) }
    }
}

/// Valid iff the functional is a single complex multiple of the conjugated
/// target, ket by ket within `tol` after normalizing the functional.
///
/// Invariant under rescaling every edge weight by a common factor.
pub fn verify_analyzer(g: &ColoredGraph, target: &TargetState, tol: f64) -> AnalyzerReport {
    let functional = match analyzer_functional(g) {
        Ok(f) => f,
        Err(e) => return AnalyzerReport::rejected(e.to_string()),
    };
    if functional.dims() != target.dims() {
        return AnalyzerReport::rejected(
            Error::ShapeMismatch { expected: target.dims().to_vec(), found: functional.dims().to_vec() }.to_string(),
        );
    }
    let norm = functional.norm();
    let Ok(unit) = normalize_state(&functional) else {
        return AnalyzerReport::rejected(Error::StateVanishes.to_string());
    };
    let expected = target.state().conj();
    // <expected|unit> with expected = conj(target)
    let overlap: Complex64 = unit.amplitudes().iter().map(|(k, a)| target.state().amplitude(k) * a).sum();

    let kets: BTreeSet<&Ket> = unit.amplitudes().keys().chain(expected.amplitudes().keys()).collect();
    let offending: Vec<(Ket, Complex64)> = kets
        .into_iter()
        .filter_map(|k| {
            let residual = unit.amplitude(k) - overlap * expected.amplitude(k);
            (residual.norm() > tol).then(|| (k.clone(), unit.amplitude(k)))
        })
        .collect();
    AnalyzerReport { is_valid: offending.is_empty(), offending, scale: Some(overlap * norm), reason: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{bell_analyzer, bell_graph, square_graph};
    use crate::graph::{Edge, Vertex};
    use crate::matching::find_cancellations;
    use crate::targets::bell_pair;

    fn ket(s: &str) -> Ket {
        s.parse().unwrap()
    }

    #[test]
    fn bell_analyzer_functional() {
        let f = analyzer_functional(&bell_analyzer(1.0, 1.0)).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.amplitude(&ket("00")), Complex64::new(1.0, 0.0));
        assert_eq!(f.amplitude(&ket("11")), Complex64::new(1.0, 0.0));
        assert_eq!(f.amplitude(&ket("01")), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn requires_inputs() {
        assert_eq!(analyzer_functional(&bell_graph()), Err(Error::NoInputVertices));
        let r = verify_analyzer(&bell_graph(), &bell_pair(2).unwrap(), 1e-9);
        assert!(!r.is_valid);
        assert!(r.reason.is_some());
    }

    #[test]
    fn bell_analyzer_validates() {
        let r = verify_analyzer(&bell_analyzer(1.0, 1.0), &bell_pair(2).unwrap(), 1e-9);
        assert!(r.is_valid, "{r:?}");
        let scale = r.scale.unwrap();
        assert!((scale - Complex64::new(2f64.sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sign_flip_is_rejected() {
        let r = verify_analyzer(&bell_analyzer(1.0, -1.0), &bell_pair(2).unwrap(), 1e-9);
        assert!(!r.is_valid);
        let kets: Vec<String> = r.offending.iter().map(|(k, _)| k.to_string()).collect();
        assert_eq!(kets, vec!["00", "11"]);
    }

    #[test]
    fn surviving_undesired_ket_is_listed() {
        let mut g = bell_analyzer(1.0, 1.0);
        g.edges.push(Edge::new(0, 1, 0, 1, 0.3));
        let r = verify_analyzer(&g, &bell_pair(2).unwrap(), 1e-9);
        assert!(!r.is_valid);
        assert!(r.offending.iter().any(|(k, _)| k.to_string() == "01"));
    }

    #[test]
    fn complex_phases_follow_conjugation() {
        let target = TargetState::new(
            "phased",
            &QuantumState::from_terms(
                vec![2, 2],
                [(ket("00"), Complex64::new(1.0, 0.0)), (ket("11"), Complex64::new(0.0, 1.0))],
            )
            .unwrap(),
        )
        .unwrap();
        let mut g = bell_analyzer(1.0, 1.0);
        g.edges[1].weight = Complex64::new(0.0, -1.0);
        assert!(verify_analyzer(&g, &target, 1e-9).is_valid);
        g.edges[1].weight = Complex64::new(0.0, 1.0);
        assert!(!verify_analyzer(&g, &target, 1e-9).is_valid);
    }

    #[test]
    fn non_input_vertices_only_need_coverage() {
        // Inputs 0,1 (qubits) plus two ancilla-like detectors 2,3; the |01> term cancels
        // between the direct edge and the route through the detectors.
        let g = ColoredGraph::new(
            "cancel",
            vec![Vertex::input(0, 2), Vertex::input(1, 2), Vertex::detector(2, 2), Vertex::detector(3, 1)],
            vec![
                Edge::new(0, 1, 0, 0, 1.0),
                Edge::new(0, 1, 1, 1, 1.0),
                Edge::new(0, 1, 0, 1, 1.0),
                Edge::new(0, 2, 0, 1, 1.0),
                Edge::new(1, 3, 1, 0, -1.0),
                Edge::new(2, 3, 0, 0, 1.0),
            ],
        );
        let f = analyzer_functional(&g).unwrap();
        assert_eq!(f.amplitude(&ket("01")), Complex64::new(0.0, 0.0));
        assert!(verify_analyzer(&g, &bell_pair(2).unwrap(), 1e-9).is_valid);
    }

    #[test]
    fn negative_loop_certificate() {
        let g = square_graph([1.0, 1.0, 1.0, -1.0]);
        let r = find_cancellations(&g, &ket("0000")).unwrap();
        assert!(r.is_cancelled());
        assert!(r.interference[0].cycles.iter().all(|c| c.len() % 2 == 0));
    }
}
