//! Fidelity loss and its exact gradient.
//!
//! Every amplitude is multilinear in the edge weights, so the derivative of
//! a ket amplitude with respect to edge `e` is the sum, over the matchings
//! containing `e` that produce the ket, of the product of the other weights.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::ColoredGraph;
use crate::matching::enumerate_perfect_matchings;
use crate::state::{check_endpoints, matching_ket, Ket};
use crate::targets::TargetState;

use super::Task;

/// Matching structure of a fixed topology, reusable across weight updates.
#[derive(Debug, Clone)]
pub struct Objective {
    num_edges: usize,
    /// Per matching: member edges and the slot of the ket it produces.
    terms: Vec<(Vec<usize>, usize)>,
    /// Overlap coefficient per ket slot.
    target: Vec<Complex64>,
}

impl Objective {
    pub fn new(g: &ColoredGraph, target: &TargetState, task: Task) -> Result<Self> {
        check_endpoints(g)?;
        let sites = task.sites(g)?;
        let dims: Vec<usize> = sites.iter().map(|&s| g.vertices[s].dimension).collect();
        if dims != target.dims() {
            return Err(Error::ShapeMismatch { expected: target.dims().to_vec(), found: dims });
        }
        let mut slots: BTreeMap<Ket, usize> = BTreeMap::new();
        let mut terms = Vec::new();
        for pm in enumerate_perfect_matchings(g) {
            let ket = matching_ket(g, &pm, &sites)?;
            let next = slots.len();
            let slot = *slots.entry(ket).or_insert(next);
            terms.push((pm.edges().to_vec(), slot));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); slots.len()];
        for (ket, slot) in &slots {
            let expected = target.state().amplitude(ket);
            // Analyzers must be proportional to the conjugated target.
            coeffs[*slot] = match task {
                Task::Generation => expected.conj(),
                Task::Analyzer => expected,
            };
        }
        Ok(Objective { num_edges: g.num_edges(), terms, target: coeffs })
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn num_matchings(&self) -> usize {
        self.terms.len()
    }

    fn amplitudes(&self, weights: &[Complex64]) -> Vec<Complex64> {
        let mut amps = vec![Complex64::new(0.0, 0.0); self.target.len()];
        for (edges, slot) in &self.terms {
            amps[*slot] += edges.iter().map(|&e| weights[e]).product::<Complex64>();
        }
        amps
    }

    /// `1 - |<target|psi>|^2 / <psi|psi>`, 1 when the state vanishes.
    pub fn loss(&self, weights: &[Complex64]) -> f64 {
        let amps = self.amplitudes(weights);
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm == 0.0 {
            return 1.0;
        }
        let overlap: Complex64 = amps.iter().zip(&self.target).map(|(a, t)| t * a).sum();
        (1.0 - overlap.norm_sqr() / norm).clamp(0.0, 1.0)
    }

    /// Loss plus per-edge gradient; `re` is `dL/dRe(w)`, `im` is `dL/dIm(w)`.
    pub fn loss_and_gradient(&self, weights: &[Complex64]) -> (f64, Vec<Complex64>) {
        let zero = Complex64::new(0.0, 0.0);
        let amps = self.amplitudes(weights);
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm == 0.0 {
            return (1.0, vec![zero; self.num_edges]);
        }
        let overlap: Complex64 = amps.iter().zip(&self.target).map(|(a, t)| t * a).sum();
        let overlap_sqr = overlap.norm_sqr();

        // d(overlap)/dw_e and sum_k conj(psi_k) dpsi_k/dw_e, both holomorphic in w_e.
        let mut d_overlap = vec![zero; self.num_edges];
        let mut d_norm = vec![zero; self.num_edges];
        let mut prefix = Vec::new();
        for (edges, slot) in &self.terms {
            prefix.clear();
            let mut acc = Complex64::new(1.0, 0.0);
            for &e in edges {
                prefix.push(acc);
                acc *= weights[e];
            }
            let mut suffix = Complex64::new(1.0, 0.0);
            for (i, &e) in edges.iter().enumerate().rev() {
                let partial = prefix[i] * suffix;
                d_overlap[e] += self.target[*slot] * partial;
                d_norm[e] += amps[*slot].conj() * partial;
                suffix *= weights[e];
            }
        }

        let loss = (1.0 - overlap_sqr / norm).clamp(0.0, 1.0);
        let grad = d_overlap
            .iter()
            .zip(&d_norm)
            .map(|(da, dn)| {
                let ca = overlap.conj() * da;
                // Real direction: dz = partial; imaginary direction: dz = i * partial.
                let (dov_re, dov_im) = (2.0 * ca.re, -2.0 * ca.im);
                let (dn_re, dn_im) = (2.0 * dn.re, -2.0 * dn.im);
                let d = |dov: f64, dnorm: f64| -(dov * norm - overlap_sqr * dnorm) / (norm * norm);
                Complex64::new(d(dov_re, dn_re), d(dov_im, dn_im))
            })
            .collect();
        (loss, grad)
    }
}

/// Weights of `g` as a flat vector.
pub fn weights_of(g: &ColoredGraph) -> Vec<Complex64> {
    g.edges.iter().map(|e| e.weight).collect()
}

/// `1 - fidelity(compute_state(g), target)`.
pub fn loss(g: &ColoredGraph, target: &TargetState) -> Result<f64> {
    task_loss(g, target, Task::Generation)
}

/// Exact gradient of [`loss`]: one entry per edge, `(dL/dRe w, dL/dIm w)` packed as a complex number.
pub fn loss_gradient(g: &ColoredGraph, target: &TargetState) -> Result<Vec<Complex64>> {
    task_loss_gradient(g, target, Task::Generation)
}

pub fn task_loss(g: &ColoredGraph, target: &TargetState, task: Task) -> Result<f64> {
    Ok(Objective::new(g, target, task)?.loss(&weights_of(g)))
}

pub fn task_loss_gradient(g: &ColoredGraph, target: &TargetState, task: Task) -> Result<Vec<Complex64>> {
    Ok(Objective::new(g, target, task)?.loss_and_gradient(&weights_of(g)).1)
}
