//! Engine for colored-graph descriptions of photonic experiments.
//!
//! A graph's vertices are detectors, its edges photon-pair sources. Under
//! n-fold coincidence post-selection the output state is the coherent sum of
//! the graph's perfect matchings, each weighted by the product of its edge
//! weights. On top of that this crate provides target states, a discovery loop
//! (weight optimization plus edge pruning), analyzer verification, 3D layout
//! and the document formats shared by the CLI and the web service.

pub mod discovery;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod layout;
pub mod matching;
pub mod state;
pub mod targets;

pub use error::{Error, Result};
pub use graph::{validate_graph, ColoredGraph, Edge, EdgeKey, Role, ValidationReport, Vertex, Violation};
pub use matching::{
    enumerate_perfect_matchings, find_cancellations, matching_amplitude, symmetric_difference_cycles,
    CancellationReport, Cycle, PerfectMatching,
};
pub use state::{compute_state, inner_product, normalize_state, Ket, QuantumState};
pub use targets::{bell_pair, fidelity, ghz_state, multi_pair_swap_target, parse_target, TargetState};

pub use num_complex::Complex64;
