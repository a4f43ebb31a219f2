//! A directory of `<name>.graph` documents.
//!
//! Writes go to a temporary file in the same directory and are renamed into
//! place, so readers see either the old or the new document.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{decode_graph, encode_graph, FormatError, GraphFile, GRAPH_EXTENSION};

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error("graph {0:?} not found")]
    NotFound(String),
    #[error("invalid graph name {0:?}: use letters, digits, '-', '_' or '.'")]
    InvalidName(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error("graph {name:?}: {source}")]
    Format {
        name: String,
        #[source]
        source: FormatError,
    },
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> LibraryError {
    let context = context.into();
    move |source| LibraryError::Io { context, source }
}

fn check_name(name: &str) -> Result<(), LibraryError> {
    let ok = !name.is_empty()
        && name.len() <= 128
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(LibraryError::InvalidName(name.to_string()))
    }
}

fn path_for(dir: &Path, name: &str) -> Result<PathBuf, LibraryError> {
    check_name(name)?;
    Ok(dir.join(format!("{name}.{GRAPH_EXTENSION}")))
}

/// Names of stored graphs, sorted.
pub fn library_list(dir: &Path) -> Result<Vec<String>, LibraryError> {
    let entries = fs::read_dir(dir).map_err(io_err(format!("listing {}", dir.display())))?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry.map_err(io_err(format!("listing {}", dir.display())))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some(GRAPH_EXTENSION) {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            if check_name(stem).is_ok() {
                names.push(stem.to_string());
            }
        }
    }
    names.sort();
    Ok(names)
}

/// Encodes and atomically stores `file` under `name`, replacing any previous version.
pub fn library_save(dir: &Path, name: &str, file: &GraphFile) -> Result<String, LibraryError> {
    let path = path_for(dir, name)?;
    let doc = encode_graph(file).map_err(|source| LibraryError::Format { name: name.to_string(), source })?;
    fs::create_dir_all(dir).map_err(io_err(format!("creating {}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(format!("writing {}", path.display())))?;
    tmp.write_all(doc.as_bytes()).map_err(io_err(format!("writing {}", path.display())))?;
    tmp.as_file().sync_all().map_err(io_err(format!("writing {}", path.display())))?;
    tmp.persist(&path)
        .map_err(|e| LibraryError::Io { context: format!("replacing {}", path.display()), source: e.error })?;
    Ok(doc)
}

/// Raw stored document text.
pub fn library_load_document(dir: &Path, name: &str) -> Result<String, LibraryError> {
    let path = path_for(dir, name)?;
    fs::read_to_string(&path).map_err(|e| {
        if e.kind() == io::ErrorKind::NotFound {
            LibraryError::NotFound(name.to_string())
        } else {
            LibraryError::Io { context: format!("reading {}", path.display()), source: e }
        }
    })
}

pub fn library_load(dir: &Path, name: &str) -> Result<GraphFile, LibraryError> {
    let doc = library_load_document(dir, name)?;
    decode_graph(&doc).map_err(|source| LibraryError::Format { name: name.to_string(), source })
}

pub fn library_delete(dir: &Path, name: &str) -> Result<(), LibraryError> {
    let path = path_for(dir, name)?;
    fs::remove_file(&path).map_err(|e| {
        if e.kind() == io::ErrorKind::NotFound {
            LibraryError::NotFound(name.to_string())
        } else {
            LibraryError::Io { context: format!("deleting {}", path.display()), source: e }
        }
    })
}
