use serde::{Deserialize, Serialize};

use crate::state::QuantumState;

use super::{decode_terms, encode_terms, parse_document, render_document, FormatError, TermDoc};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    dims: Vec<usize>,
    norm: f64,
    vanishes: bool,
    amplitudes: Vec<TermDoc>,
}

/// A computed state: normalized amplitudes plus the norm of the raw state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDocument {
    pub state: QuantumState,
    pub norm: f64,
}

impl StateDocument {
    pub fn vanishes(&self) -> bool {
        self.norm == 0.0
    }
}

pub fn encode_state(doc: &StateDocument) -> Result<String, FormatError> {
    render_document(&StateDoc {
        dims: doc.state.dims().to_vec(),
        norm: doc.norm,
        vanishes: doc.vanishes(),
        amplitudes: encode_terms(doc.state.amplitudes(), "amplitudes")?,
    })
}

pub fn decode_state(text: &str) -> Result<StateDocument, FormatError> {
    let doc: StateDoc = parse_document(text)?;
    let terms = decode_terms(&doc.amplitudes, "amplitudes")?;
    let state = QuantumState::from_terms(doc.dims, terms)
        .map_err(|e| FormatError::Field { path: "amplitudes".into(), message: e.to_string() })?;
    Ok(StateDocument { state, norm: doc.norm })
}
