//! Line-oriented JSON documents with a header line and atomic replacement.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::StoreError;
use crate::schema::FORMAT;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct Header {
    pub format: String,
    pub kind: String,
    pub version: u64,
    pub count: usize,
}

impl Header {
    pub fn new(kind: &str, version: u64, count: usize) -> Self {
        Header { format: FORMAT.to_string(), kind: kind.to_string(), version, count }
    }
}

/// Serialize header and entries into the on-disk byte form.
pub(crate) fn render<T: Serialize>(header: &Header, entries: &[T]) -> Result<Vec<u8>, StoreError> {
    let mut out = serde_json::to_vec(header)?;
    out.push(b'\n');
    for entry in entries {
        serde_json::to_writer(&mut out, entry)?;
        out.push(b'\n');
    }
    Ok(out)
}

/// Write to a sibling temp file, fsync, then rename over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let io = |e| StoreError::io(path, e);
    let tmp = path.with_extension("jsonl.tmp");
    {
        let mut file = File::create(&tmp).map_err(io)?;
        file.write_all(bytes).map_err(io)?;
        file.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)?;
    if let Some(dir) = path.parent() {
        // Persist the rename itself; not all platforms allow opening dirs.
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}

/// Read a document of `kind`. A missing file yields `None`.
pub(crate) fn read<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<Option<(Header, Vec<T>)>, StoreError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(StoreError::io(path, e)),
    };
    let malformed = |line: usize, message: String| StoreError::Malformed { path: path.to_path_buf(), line, message };

    let mut lines = BufReader::new(file).lines();
    let header_line = match lines.next() {
        Some(line) => line.map_err(|e| StoreError::io(path, e))?,
        None => return Err(malformed(1, "missing header".into())),
    };
    let raw: serde_json::Value =
        serde_json::from_str(&header_line).map_err(|e| malformed(1, format!("header: {e}")))?;
    match raw.get("format").and_then(|f| f.as_str()) {
        Some(FORMAT) => {}
        Some(other) => {
            return Err(StoreError::UnsupportedFormat { path: path.to_path_buf(), found: other.to_string() })
        }
        None => return Err(malformed(1, "header lacks a format".into())),
    }
    let header: Header = serde_json::from_value(raw).map_err(|e| malformed(1, format!("header: {e}")))?;
    if header.kind != kind {
        return Err(malformed(1, format!("expected a {kind} document, found {}", header.kind)));
    }

    let mut entries = Vec::with_capacity(header.count);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| StoreError::io(path, e))?;
        if entries.len() == header.count {
            return Err(malformed(line_no, format!("more than the {} declared entries", header.count)));
        }
        let entry = serde_json::from_str(&line).map_err(|e| malformed(line_no, e.to_string()))?;
        entries.push(entry);
    }
    if entries.len() != header.count {
        return Err(malformed(
            entries.len() + 2,
            format!("expected {} entries, found {}", header.count, entries.len()),
        ));
    }
    Ok(Some((header, entries)))
}
