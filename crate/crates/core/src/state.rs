//! Post-selected quantum states read off a graph's perfect matchings.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, Role, WEIGHT_TOL};
use crate::matching::{enumerate_perfect_matchings, PerfectMatching};

const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// Largest per-site dimension representable in digit-string kets.
pub const MAX_KET_DIGIT_DIMENSION: usize = 36;

/// One basis ket: a mode index per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ket(pub Vec<usize>);

impl Ket {
    pub fn modes(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn fits(&self, dims: &[usize]) -> bool {
        self.0.len() == dims.len() && self.0.iter().zip(dims).all(|(m, d)| m < d)
    }

    /// Row-major index into a dense vector over `dims`.
    pub fn dense_index(&self, dims: &[usize]) -> usize {
        self.0.iter().zip(dims).fold(0, |acc, (m, d)| acc * d + m)
    }

    pub fn from_dense_index(mut index: usize, dims: &[usize]) -> Ket {
        let mut modes = vec![0; dims.len()];
        for (slot, d) in modes.iter_mut().zip(dims).rev() {
            *slot = index % d;
            index /= d;
        }
        Ket(modes)
    }
}

impl fmt::Display for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&m| m < DIGITS.len()) {
            for &m in &self.0 {
                write!(f, "{}", DIGITS[m] as char)?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
            write!(f, "[{}]", parts.join(","))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KetParseError(pub String);

impl fmt::Display for KetParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid ket {:?}: expected digits 0-9 or a-z", self.0)
    }
}

impl std::error::Error for KetParseError {}

impl FromStr for Ket {
    type Err = KetParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim().trim_start_matches('|').trim_end_matches('>').trim_end_matches('⟩');
        s.chars()
            .map(|c| c.to_digit(36).map(|d| d as usize))
            .collect::<Option<Vec<_>>>()
            .map(Ket)
            .ok_or_else(|| KetParseError(s.to_string()))
    }
}

/// Sparse pure state over sites with per-site dimensions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuantumState {
    dims: Vec<usize>,
    amplitudes: BTreeMap<Ket, Complex64>,
}

impl QuantumState {
    pub fn new(dims: Vec<usize>) -> Self {
        QuantumState { dims, amplitudes: BTreeMap::new() }
    }

    /// Builds a state from `(ket, amplitude)` pairs, summing repeated kets.
    pub fn from_terms(dims: Vec<usize>, terms: impl IntoIterator<Item = (Ket, Complex64)>) -> Result<Self> {
        let mut state = QuantumState::new(dims);
        for (ket, amp) in terms {
            state.add(ket, amp)?;
        }
        Ok(state)
    }

    pub fn num_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &BTreeMap<Ket, Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, ket: &Ket) -> Complex64 {
        self.amplitudes.get(ket).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Adds `amp` to the amplitude of `ket`; exact zeros are dropped.
    pub fn add(&mut self, ket: Ket, amp: Complex64) -> Result<()> {
        if !ket.fits(&self.dims) {
            return Err(Error::ShapeMismatch { expected: self.dims.clone(), found: ket.0 });
        }
        let entry = self.amplitudes.entry(ket.clone()).or_default();
        *entry += amp;
        if *entry == Complex64::new(0.0, 0.0) {
            self.amplitudes.remove(&ket);
        }
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, factor: Complex64) -> QuantumState {
        let mut out = QuantumState::new(self.dims.clone());
        for (k, a) in &self.amplitudes {
            let v = a * factor;
            if v != Complex64::new(0.0, 0.0) {
                out.amplitudes.insert(k.clone(), v);
            }
        }
        out
    }

    /// Element-wise complex conjugate.
    pub fn conj(&self) -> QuantumState {
        QuantumState {
            dims: self.dims.clone(),
            amplitudes: self.amplitudes.iter().map(|(k, a)| (k.clone(), a.conj())).collect(),
        }
    }

    /// Dense amplitude vector in row-major ket order.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let size: usize = self.dims.iter().product();
        let mut out = vec![Complex64::new(0.0, 0.0); size];
        for (k, a) in &self.amplitudes {
            out[k.dense_index(&self.dims)] = *a;
        }
        out
    }

    /// True if both states agree ket by ket within `tol`.
    pub fn approx_eq(&self, other: &QuantumState, tol: f64) -> bool {
        if self.dims != other.dims {
            return false;
        }
        self.amplitudes
            .keys()
            .chain(other.amplitudes.keys())
            .all(|k| (self.amplitude(k) - other.amplitude(k)).norm() <= tol)
    }
}

impl fmt::Display for QuantumState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.amplitudes.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, a)) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i)|{}>", a.re, a.im, k)?;
        }
        Ok(())
    }
}

/// Mode string of a perfect matching over `sites`, plus range checks on every vertex.
pub(crate) fn matching_ket(g: &ColoredGraph, pm: &PerfectMatching, sites: &[usize]) -> Result<Ket> {
    let mut modes = vec![usize::MAX; g.num_vertices()];
    for &ei in pm.edges() {
        let e = &g.edges[ei];
        modes[e.u] = e.cu;
        modes[e.v] = e.cv;
    }
    for (vertex, (&mode, vx)) in modes.iter().zip(&g.vertices).enumerate() {
        if mode >= vx.dimension {
            let dimension = vx.dimension;
            return Err(if vx.role == Role::Ancilla {
                Error::AncillaModeOutOfRange { vertex, mode, dimension }
            } else {
                Error::ModeOutOfRange { vertex, mode, dimension }
            });
        }
    }
    Ok(Ket(sites.iter().map(|&s| modes[s]).collect()))
}

pub(crate) fn check_endpoints(g: &ColoredGraph) -> Result<()> {
    for (edge, e) in g.edges.iter().enumerate() {
        for vertex in [e.u, e.v] {
            if vertex >= g.num_vertices() {
                return Err(Error::BadEndpoint { edge, vertex });
            }
        }
    }
    Ok(())
}

/// Coherent sum over perfect matchings, keyed by the modes at `sites`.
///
/// Kets whose contributions cancel to within relative `WEIGHT_TOL` are dropped.
pub(crate) fn state_over_sites(g: &ColoredGraph, sites: &[usize]) -> Result<QuantumState> {
    check_endpoints(g)?;
    let dims: Vec<usize> = sites.iter().map(|&s| g.vertices[s].dimension).collect();
    let mut sums: BTreeMap<Ket, (Complex64, f64)> = BTreeMap::new();
    for pm in enumerate_perfect_matchings(g) {
        let ket = matching_ket(g, &pm, sites)?;
        let amp = pm.amplitude_unchecked(g);
        let slot = sums.entry(ket).or_default();
        slot.0 += amp;
        slot.1 += amp.norm();
    }
    let mut state = QuantumState::new(dims);
    for (ket, (sum, scale)) in sums {
        if sum.norm() > WEIGHT_TOL * scale {
            state.amplitudes.insert(ket, sum);
        }
    }
    Ok(state)
}

/// Unnormalized post-selected state: one term per perfect matching, kets over
/// the non-ancilla vertices in ascending id order.
pub fn compute_state(g: &ColoredGraph) -> Result<QuantumState> {
    state_over_sites(g, &g.state_sites())
}

pub fn normalize_state(s: &QuantumState) -> Result<QuantumState> {
    let norm = s.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::StateVanishes);
    }
    Ok(s.scaled(Complex64::new(1.0 / norm, 0.0)))
}

/// `<a|b>`, conjugating the left argument.
pub fn inner_product(a: &QuantumState, b: &QuantumState) -> Result<Complex64> {
    if a.dims != b.dims {
        return Err(Error::ShapeMismatch { expected: a.dims.clone(), found: b.dims.clone() });
    }
    Ok(a.amplitudes.iter().filter_map(|(k, x)| b.amplitudes.get(k).map(|y| x.conj() * y)).sum())
}
