//! Machine-readable result documents shared by the CLI and the service.
//!
//! Edges are written as `[u, v, cu, cv]` so a report stays meaningful
//! without the edge order of the graph it came from.

use serde::{Deserialize, Serialize};

use crate::discovery::{AnalyzerReport, SearchResult};
use crate::graph::ColoredGraph;
use crate::layout::Layout;
use crate::matching::{CancellationReport, Cycle, PerfectMatching};

use super::{encode_terms, render_document, ComplexDoc, FormatError, TermDoc};

pub type EdgeTuple = [usize; 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchingDoc {
    pub edges: Vec<EdgeTuple>,
    pub amplitude: ComplexDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchingsDoc {
    pub count: usize,
    pub matchings: Vec<MatchingDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleDoc {
    pub vertices: Vec<usize>,
    pub edges: Vec<EdgeTuple>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceDoc {
    /// Indices into `contributions`.
    pub first: usize,
    pub second: usize,
    pub cycles: Vec<CycleDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CancellationDoc {
    pub ket: String,
    pub net: ComplexDoc,
    pub cancelled: bool,
    pub contributions: Vec<MatchingDoc>,
    pub interference: Vec<InterferenceDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutDoc {
    pub positions: Vec<[f64; 3]>,
    pub stress: f64,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzerDoc {
    pub valid: bool,
    pub offending: Vec<TermDoc>,
    pub scale: Option<ComplexDoc>,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSummaryDoc {
    pub name: String,
    pub loss: f64,
    pub feasible: bool,
    pub converged: bool,
    pub edge_count: usize,
    pub initial_edges: usize,
    pub edges_removed: usize,
    pub iterations: usize,
    pub seed: u64,
    pub loss_trace: Vec<f64>,
}

fn tuple(g: &ColoredGraph, index: usize) -> EdgeTuple {
    let e = &g.edges[index];
    [e.u, e.v, e.cu, e.cv]
}

fn matching_doc(g: &ColoredGraph, pm: &PerfectMatching) -> MatchingDoc {
    let amplitude = pm.edges().iter().map(|&i| g.edges[i].weight).product::<num_complex::Complex64>();
    MatchingDoc { edges: pm.edges().iter().map(|&i| tuple(g, i)).collect(), amplitude: amplitude.into() }
}

pub fn matchings_doc(g: &ColoredGraph, matchings: &[PerfectMatching]) -> MatchingsDoc {
    MatchingsDoc { count: matchings.len(), matchings: matchings.iter().map(|pm| matching_doc(g, pm)).collect() }
}

fn cycle_doc(g: &ColoredGraph, c: &Cycle) -> CycleDoc {
    CycleDoc { vertices: c.vertices.clone(), edges: c.edges.iter().map(|&i| tuple(g, i)).collect() }
}

pub fn cancellation_doc(g: &ColoredGraph, report: &CancellationReport) -> CancellationDoc {
    CancellationDoc {
        ket: report.ket.to_string(),
        net: report.net.into(),
        cancelled: report.is_cancelled(),
        contributions: report
            .contributions
            .iter()
            .map(|c| MatchingDoc {
                edges: c.matching.edges().iter().map(|&i| tuple(g, i)).collect(),
                amplitude: c.amplitude.into(),
            })
            .collect(),
        interference: report
            .interference
            .iter()
            .map(|p| InterferenceDoc {
                first: p.first,
                second: p.second,
                cycles: p.cycles.iter().map(|c| cycle_doc(g, c)).collect(),
            })
            .collect(),
    }
}

pub fn layout_doc(layout: &Layout) -> LayoutDoc {
    LayoutDoc {
        positions: layout.positions.clone(),
        stress: layout.stress,
        sweeps: layout.trace.len().saturating_sub(1),
    }
}

pub fn analyzer_doc(report: &AnalyzerReport) -> Result<AnalyzerDoc, FormatError> {
    Ok(AnalyzerDoc {
        valid: report.is_valid,
        offending: encode_terms(report.offending.iter().map(|(k, a)| (k, a)), "offending")?,
        scale: report.scale.map(Into::into),
        reason: report.reason.clone(),
    })
}

pub fn search_summary_doc(result: &SearchResult) -> SearchSummaryDoc {
    SearchSummaryDoc {
        name: result.graph.name.clone(),
        loss: result.loss,
        feasible: result.feasible,
        converged: result.converged,
        edge_count: result.graph.num_edges(),
        initial_edges: result.initial_edges,
        edges_removed: result.edges_removed,
        iterations: result.iterations,
        seed: result.seed,
        loss_trace: result.loss_trace.clone(),
    }
}

/// Pretty JSON with a trailing newline, like every other document.
pub fn render_report<T: Serialize>(report: &T) -> Result<String, FormatError> {
    render_document(report)
}
