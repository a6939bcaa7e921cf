//! Data files and run manifests.
//!
//! Every data file is written next to exactly one manifest,
//! `<subcommand>.manifest.json`, which echoes the resolved configuration and
//! lists each file with its schema name and SHA-256.

use super::config::{OutputFormat, RunConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Version of every output schema. Bumped on breaking changes.
pub const SCHEMA_VERSION: u32 = 1;

/// One named pass/fail check evaluated during a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub schema: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub config: RunConfig,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputFile>,
    /// `(result, producing code path)` pairs.
    pub provenance: Vec<(String, String)>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// JSON document carrying its schema name and version.
#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    schema: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Serialize)]
struct Rows<'a, R: Serialize> {
    rows: &'a [R],
}

/// Collects the files of one run and writes them.
pub struct OutputSink {
    dir: PathBuf,
    stem: String,
    files: Vec<OutputFile>,
}

impl OutputSink {
    pub fn new(dir: &Path, stem: &str) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), stem: stem.into(), files: Vec::new() })
    }

    fn record(&mut self, name: String, schema: &str, bytes: Vec<u8>) -> std::io::Result<()> {
        let path = self.dir.join(&name);
        std::fs::write(&path, &bytes)?;
        self.files.push(OutputFile { path: PathBuf::from(name), schema: format!("{schema}/v{SCHEMA_VERSION}"), sha256: sha256_hex(&bytes) });
        Ok(())
    }

    /// Writes a single JSON document.
    pub fn json<T: Serialize>(&mut self, suffix: &str, schema: &str, body: &T) -> std::io::Result<()> {
        let doc = Versioned { schema_version: SCHEMA_VERSION, schema, body };
        let mut bytes = serde_json::to_vec_pretty(&doc).map_err(std::io::Error::other)?;
        bytes.push(b'\n');
        self.record(format!("{}{suffix}.json", self.stem), schema, bytes)
    }

    /// Writes a table as CSV with a header row, or as a JSON `rows` array.
    pub fn table<R: Serialize>(&mut self, suffix: &str, schema: &str, rows: &[R], format: OutputFormat) -> std::io::Result<()> {
        match format {
            OutputFormat::Json => self.json(suffix, schema, &Rows { rows }),
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for r in rows {
                    w.serialize(r).map_err(std::io::Error::other)?;
                }
                let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
                self.record(format!("{}{suffix}.csv", self.stem), schema, bytes)
            }
        }
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.files
    }

    /// Writes the manifest and returns its path.
    pub fn finish(self, mut manifest: RunManifest) -> std::io::Result<(PathBuf, RunManifest)> {
        manifest.outputs = self.files;
        let path = self.dir.join(format!("{}.manifest.json", self.stem));
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(std::io::Error::other)?;
        bytes.push(b'\n');
        std::fs::write(&path, bytes)?;
        Ok((path, manifest))
    }
}
