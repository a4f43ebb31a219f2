//! Text document formats and the on-disk graph library.
//!
//! Documents are pretty-printed JSON with a fixed field order. Numbers use the
//! shortest decimal that parses back to the same `f64`, so weights and
//! positions survive a round trip bit for bit.

mod graph_file;
mod library;
mod reports;
mod state_doc;
mod template;

pub use graph_file::{decode_graph, encode_graph, GraphFile};
pub use library::{library_delete, library_list, library_load, library_load_document, library_save, LibraryError};
pub use reports::{
    analyzer_doc, cancellation_doc, layout_doc, matchings_doc, render_report, search_summary_doc, AnalyzerDoc,
    CancellationDoc, CycleDoc, EdgeTuple, InterferenceDoc, LayoutDoc, MatchingDoc, MatchingsDoc, SearchSummaryDoc,
};
pub use state_doc::{decode_state, encode_state, StateDocument};
pub use template::{decode_search_template, encode_search_template, search_config_from_graph};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Role;
use crate::state::{Ket, MAX_KET_DIGIT_DIMENSION};

/// Extension of graph documents in the library.
pub const GRAPH_EXTENSION: &str = "graph";
/// Extension of search template documents.
pub const TEMPLATE_EXTENSION: &str = "template";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("parse error at line {line}, column {column} (field `{path}`): {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("field `{path}`: {message}")]
    Field { path: String, message: String },
    #[error("target required")]
    MissingTarget,
    #[error("cannot encode: {0}")]
    Encode(String),
}

impl FormatError {
    fn field(path: impl Into<String>, message: impl Into<String>) -> Self {
        FormatError::Field { path: path.into(), message: message.into() }
    }
}

pub(crate) fn parse_document<T: DeserializeOwned>(doc: &str) -> Result<T, FormatError> {
    let mut de = serde_json::Deserializer::from_str(doc);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        FormatError::Parse { path, line: inner.line(), column: inner.column(), message: inner.to_string() }
    })?;
    de.end().map_err(|e| FormatError::Parse {
        path: ".".into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(value)
}

pub(crate) fn render_document<T: Serialize>(value: &T) -> Result<String, FormatError> {
    let mut out = serde_json::to_string_pretty(value).map_err(|e| FormatError::Encode(e.to_string()))?;
    out.push('\n');
    Ok(out)
}

/// `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDoc {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexDoc {
    fn from(c: Complex64) -> Self {
        ComplexDoc { re: c.re, im: c.im }
    }
}

impl From<ComplexDoc> for Complex64 {
    fn from(c: ComplexDoc) -> Self {
        Complex64::new(c.re, c.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct VertexDoc {
    pub id: usize,
    pub role: Role,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 3]>,
}

/// One `(ket, amplitude)` term; kets are digit strings such as `"0101"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub ket: String,
    pub amplitude: ComplexDoc,
}

pub(crate) fn check_finite(path: &str, values: &[f64]) -> Result<(), FormatError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(FormatError::Encode(format!("{path} is not finite")))
    }
}

pub(crate) fn encode_terms<'a>(
    terms: impl IntoIterator<Item = (&'a Ket, &'a Complex64)>,
    path: &str,
) -> Result<Vec<TermDoc>, FormatError> {
    terms
        .into_iter()
        .enumerate()
        .map(|(i, (ket, amp))| {
            check_finite(&format!("{path}[{i}].amplitude"), &[amp.re, amp.im])?;
            if ket.modes().iter().any(|&m| m >= MAX_KET_DIGIT_DIMENSION) {
                return Err(FormatError::Encode(format!("{path}[{i}].ket has a mode above 35")));
            }
            Ok(TermDoc { ket: ket.to_string(), amplitude: (*amp).into() })
        })
        .collect()
}

pub(crate) fn decode_terms(terms: &[TermDoc], path: &str) -> Result<Vec<(Ket, Complex64)>, FormatError> {
    terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let ket: Ket = t.ket.parse().map_err(|e| FormatError::field(format!("{path}[{i}].ket"), format!("{e}")))?;
            Ok((ket, t.amplitude.into()))
        })
        .collect()
}
