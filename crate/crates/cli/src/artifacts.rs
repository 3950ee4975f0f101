use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const TOOL: &str = "qpspec";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(s, "{b:02x}");
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtifactKind {
    Csv,
    Json,
}

/// One output file, body without the provenance header.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub kind: ArtifactKind,
    pub body: String,
}

impl Artifact {
    pub fn json<T: Serialize>(name: &str, value: &T) -> Result<Self> {
        Ok(Artifact { name: name.to_string(), kind: ArtifactKind::Json, body: serde_json::to_string_pretty(value)? })
    }

    /// File contents: CSVs get a `# qpspec <version> config=<hash>` comment
    /// line, JSON documents a `header` field wrapping the data.
    pub fn render(&self, config_hash: &str) -> String {
        let header = format!("{TOOL} {VERSION} config={config_hash}");
        match self.kind {
            ArtifactKind::Csv => format!("# {header}\n{}", self.body),
            ArtifactKind::Json => format!("{{\n\"header\": {:?},\n\"data\": {}\n}}\n", header, self.body),
        }
    }
}

/// Comma-separated table with LF line endings and round-trip float output.
pub struct Csv {
    body: String,
    columns: usize,
}

pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
    None,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::I(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::None, Into::into)
    }
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Csv { body: format!("{}\n", columns.join(",")), columns: columns.len() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns, "row width");
        let text: Vec<String> = cells
            .into_iter()
            .map(|c| match c {
                // `Display` for f64 is the shortest round-trip form, '.' decimal
                Cell::F(x) => format!("{x}"),
                Cell::I(x) => x.to_string(),
                Cell::S(s) => s,
                Cell::B(b) => b.to_string(),
                Cell::None => String::new(),
            })
            .collect();
        self.body.push_str(&text.join(","));
        self.body.push('\n');
    }

    pub fn finish(self, name: &str) -> Artifact {
        Artifact { name: name.to_string(), kind: ArtifactKind::Csv, body: self.body }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub kind: ArtifactKind,
    pub sha256: String,
    /// Digest of the body alone, which excludes the header line.
    pub body_sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
    pub compute_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub tool: String,
    pub tool_version: String,
    pub task: String,
    pub config: serde_json::Value,
    pub cache_hit: bool,
    pub timings: Timings,
    pub outputs: Vec<OutputEntry>,
    pub warnings: Vec<String>,
    pub health_failures: Vec<String>,
}

pub const RECORD_FILE: &str = "run_record.json";

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io { path: path.to_path_buf(), source }
}

/// Writes `files` into `dir`. Each file goes to a temporary in the same
/// directory first and is renamed into place only after every file has been
/// written, so a failure leaves no partial outputs.
pub fn write_atomically(dir: &Path, files: &[(String, String)]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
        tmp.write_all(contents.as_bytes()).map_err(|e| io_err(tmp.path(), e))?;
        tmp.as_file().sync_all().map_err(|e| io_err(tmp.path(), e))?;
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, target) in staged {
        tmp.persist(&target).map_err(|e| io_err(&target, e.error))?;
    }
    Ok(())
}

pub fn cache_entry(cache: &Path, hash: &str) -> PathBuf {
    cache.join(hash)
}

/// Loads a cached run: the record and the rendered files, verified against
/// the manifest digests. Any mismatch is treated as a miss.
pub fn load_cached(entry: &Path) -> Option<(RunRecord, Vec<(String, String)>)> {
    let record: RunRecord = serde_json::from_str(&fs::read_to_string(entry.join(RECORD_FILE)).ok()?).ok()?;
    let mut files = Vec::with_capacity(record.outputs.len());
    for out in &record.outputs {
        let contents = fs::read_to_string(entry.join(&out.file)).ok()?;
        if sha256_hex(contents.as_bytes()) != out.sha256 {
            return None;
        }
        files.push((out.file.clone(), contents));
    }
    Some((record, files))
}
