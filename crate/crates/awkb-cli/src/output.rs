//! Deterministic artifact emission: CSV/JSON data files with a metadata
//! preamble, plus a manifest that lists every emitted file with a SHA-256
//! digest. Identical configurations produce byte-identical data files; the
//! manifest adds wall-clock timings unless suppressed.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{OutputFormat, ScenarioConfig};

/// One typed cell of a data table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
    Null,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // `{}` on f64 prints the shortest digits that round-trip.
            Cell::F(v) => format!("{v}"),
            Cell::I(v) => format!("{v}"),
            Cell::S(v) => v.clone(),
            Cell::B(v) => format!("{v}"),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::F(v) => serde_json::json!(v),
            Cell::I(v) => serde_json::json!(v),
            Cell::S(v) => serde_json::json!(v),
            Cell::B(v) => serde_json::json!(v),
            Cell::Null => serde_json::Value::Null,
        }
    }
}

/// A table to emit: column headers, rows, and `key: value` preamble
/// metadata (rendered as `#` comment lines in CSV, as a metadata object in
/// JSON). Preamble content must be deterministic — no timestamps.
#[derive(Debug, Clone)]
pub struct DataFile {
    /// File stem suffix; the final name is `{output.path}.{suffix}.{ext}`
    /// (or `{output.path}.{ext}` when empty).
    pub suffix: String,
    pub preamble: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl DataFile {
    pub fn new(suffix: &str, columns: &[&str]) -> Self {
        Self {
            suffix: suffix.into(),
            preamble: Vec::new(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.preamble.push((key.into(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.preamble {
            s.push_str(&format!("# {k}: {v}\n"));
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    fn render_json(&self) -> String {
        let metadata: serde_json::Map<String, serde_json::Value> = self
            .preamble
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::json!(v)))
            .collect();
        let rows: Vec<Vec<serde_json::Value>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::json).collect())
            .collect();
        let doc = serde_json::json!({
            "metadata": metadata,
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("data file serializes");
        s.push('\n');
        s
    }
}

/// Manifest entry for one emitted file.
#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Writes data files and accumulates the manifest.
pub struct Emitter {
    out_dir: PathBuf,
    stem: String,
    format: OutputFormat,
    seedless: bool,
    files: Vec<FileRecord>,
    metadata: serde_json::Map<String, serde_json::Value>,
    timings_ms: Vec<(String, u128)>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

impl Emitter {
    pub fn new(out_dir: &Path, stem: &str, format: OutputFormat, seedless: bool) -> Self {
        Self {
            out_dir: out_dir.to_path_buf(),
            stem: stem.into(),
            format,
            seedless,
            files: Vec::new(),
            metadata: serde_json::Map::new(),
            timings_ms: Vec::new(),
        }
    }

    fn file_name(&self, suffix: &str) -> String {
        if suffix.is_empty() {
            format!("{}.{}", self.stem, self.format.extension())
        } else {
            format!("{}.{}.{}", self.stem, suffix, self.format.extension())
        }
    }

    /// Renders and writes one data file, recording it in the manifest.
    pub fn write(&mut self, file: &DataFile) -> io::Result<()> {
        let content = match self.format {
            OutputFormat::Csv => file.render_csv(),
            OutputFormat::Json => file.render_json(),
        };
        let name = self.file_name(&file.suffix);
        fs::create_dir_all(&self.out_dir)?;
        fs::write(self.out_dir.join(&name), content.as_bytes())?;
        self.files.push(FileRecord {
            name,
            sha256: sha256_hex(content.as_bytes()),
            bytes: content.len(),
        });
        Ok(())
    }

    /// Adds command-specific manifest metadata (deterministic values only).
    pub fn meta(&mut self, key: &str, value: serde_json::Value) {
        self.metadata.insert(key.into(), value);
    }

    pub fn timing(&mut self, label: &str, ms: u128) {
        self.timings_ms.push((label.into(), ms));
    }

    /// Writes `{stem}.manifest.json` echoing the configuration and listing
    /// every data file with its digest. Timings are omitted in seedless
    /// mode so the whole artifact set is reproducible byte for byte.
    pub fn finish(self, command: &str, config: &ScenarioConfig) -> io::Result<()> {
        let mut doc = serde_json::Map::new();
        doc.insert(
            "tool".into(),
            serde_json::json!({
                "name": "awkb",
                "version": env!("CARGO_PKG_VERSION"),
            }),
        );
        doc.insert("command".into(), serde_json::json!(command));
        doc.insert(
            "config".into(),
            serde_json::to_value(config).expect("config serializes"),
        );
        doc.insert(
            "files".into(),
            serde_json::to_value(&self.files).expect("records serialize"),
        );
        doc.insert("metadata".into(), serde_json::Value::Object(self.metadata));
        if !self.seedless {
            let timings: serde_json::Map<String, serde_json::Value> = self
                .timings_ms
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::json!(v)))
                .collect();
            doc.insert("timings_ms".into(), serde_json::Value::Object(timings));
        }
        let mut content =
            serde_json::to_string_pretty(&serde_json::Value::Object(doc)).expect("manifest");
        content.push('\n');
        fs::create_dir_all(&self.out_dir)?;
        fs::write(
            self.out_dir.join(format!("{}.manifest.json", self.stem)),
            content.as_bytes(),
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_renders_preamble_header_and_shortest_floats() {
        let mut f = DataFile::new("", &["x", "y", "tag"]);
        f.meta("command", "demo");
        f.push(vec![Cell::F(0.1), Cell::F(1.0 / 3.0), Cell::S("allowed".into())]);
        f.push(vec![Cell::F(2.0), Cell::Null, Cell::B(true)]);
        let s = f.render_csv();
        assert_eq!(
            s,
            "# command: demo\nx,y,tag\n0.1,0.3333333333333333,allowed\n2,,true\n"
        );
    }

    #[test]
    fn json_mirrors_the_same_schema() {
        let mut f = DataFile::new("", &["x"]);
        f.meta("k", "v");
        f.push(vec![Cell::F(0.5)]);
        let doc: serde_json::Value = serde_json::from_str(&f.render_json()).unwrap();
        assert_eq!(doc["columns"][0], "x");
        assert_eq!(doc["rows"][0][0], 0.5);
        assert_eq!(doc["metadata"]["k"], "v");
    }

    #[test]
    fn digest_matches_content() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
