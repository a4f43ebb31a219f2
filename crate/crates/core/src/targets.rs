//! Target states and fidelity scoring.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{inner_product, normalize_state, Ket, QuantumState};

/// A normalized state with a human-readable label such as `GHZ(n=4,d=3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    label: String,
    state: QuantumState,
}

impl TargetState {
    /// Normalizes `state`; fails if it vanishes. States already within
    /// `1e-12` of unit norm are kept bit for bit.
    pub fn new(label: impl Into<String>, state: &QuantumState) -> Result<Self> {
        let state = if (state.norm() - 1.0).abs() <= 1e-12 { state.clone() } else { normalize_state(state)? };
        Ok(TargetState { label: label.into(), state })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn state(&self) -> &QuantumState {
        &self.state
    }

    pub fn dims(&self) -> &[usize] {
        self.state.dims()
    }

    pub fn num_sites(&self) -> usize {
        self.state.num_sites()
    }
}

impl fmt::Display for TargetState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.label, self.state)
    }
}

fn equal_superposition(label: String, dims: Vec<usize>, kets: impl IntoIterator<Item = Ket>) -> Result<TargetState> {
    let state = QuantumState::from_terms(dims, kets.into_iter().map(|k| (k, Complex64::new(1.0, 0.0))))?;
    TargetState::new(label, &state)
}

/// `(1/sqrt d) sum_j |j>^n`.
pub fn ghz_state(n: usize, d: usize) -> Result<TargetState> {
    if n < 2 || d < 2 {
        return Err(Error::InvalidTarget(format!("GHZ needs n >= 2 and d >= 2, got n={n}, d={d}")));
    }
    equal_superposition(format!("GHZ(n={n},d={d})"), vec![d; n], (0..d).map(|j| Ket(vec![j; n])))
}

/// `(1/sqrt d) sum_j |jj>`.
pub fn bell_pair(d: usize) -> Result<TargetState> {
    if d < 2 {
        return Err(Error::InvalidTarget(format!("Bell pair needs d >= 2, got d={d}")));
    }
    equal_superposition(format!("Bell(d={d})"), vec![d; 2], (0..d).map(|j| Ket(vec![j, j])))
}

/// `n_pairs` copies of the d-dimensional Bell pair shared between two parties.
///
/// Party A holds sites `0..n_pairs`, party B the rest; site `k` pairs with `k + n_pairs`.
pub fn multi_pair_swap_target(n_pairs: usize, d: usize) -> Result<TargetState> {
    if n_pairs < 1 || d < 2 {
        return Err(Error::InvalidTarget(format!(
            "swap target needs n_pairs >= 1 and d >= 2, got n_pairs={n_pairs}, d={d}"
        )));
    }
    let count = d
        .checked_pow(n_pairs as u32)
        .filter(|c| *c <= 1 << 24)
        .ok_or_else(|| Error::InvalidTarget(format!("swap target with d^{n_pairs} terms is too large")))?;
    let kets = (0..count).map(|i| {
        let half = Ket::from_dense_index(i, &vec![d; n_pairs]).0;
        Ket(half.iter().chain(&half).copied().collect())
    });
    let label = if n_pairs == 1 { format!("Bell(d={d})") } else { format!("Swap(pairs={n_pairs},d={d})") };
    equal_superposition(label, vec![d; 2 * n_pairs], kets)
}

/// Parses `ghz:n,d`, `bell:d` or `swap:n_pairs,d`.
pub fn parse_target(text: &str) -> Result<TargetState> {
    let bad = || Error::InvalidTarget(format!("cannot parse target {text:?}; expected ghz:n,d, bell:d or swap:n,d"));
    let (kind, args) = text.trim().split_once(':').ok_or_else(bad)?;
    let args: Vec<usize> =
        args.split(',').map(|a| a.trim().parse::<usize>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
    match (kind.trim().to_ascii_lowercase().as_str(), args.as_slice()) {
        ("ghz", [n, d]) => ghz_state(*n, *d),
        ("bell", [d]) => bell_pair(*d),
        ("swap", [n, d]) => multi_pair_swap_target(*n, *d),
        _ => Err(bad()),
    }
}

/// `|<target|psi>|^2 / <psi|psi>`, or 0 when `psi` vanishes.
pub fn fidelity(psi: &QuantumState, target: &TargetState) -> Result<f64> {
    let overlap = inner_product(target.state(), psi)?;
    let norm = psi.norm_sqr();
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok((overlap.norm_sqr() / norm).clamp(0.0, 1.0))
}
