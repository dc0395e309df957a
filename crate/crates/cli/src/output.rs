//! Run manifest, report envelopes and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Bumped whenever a report field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub args: Vec<String>,
    /// `preset:<name>` or a file path, per config kind.
    pub configs: Vec<(String, String)>,
    pub seed: u64,
    pub output_dir: String,
    /// RFC 3339, from `SOURCE_DATE_EPOCH` when set.
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, configs: Vec<(String, String)>, seed: u64, out: &Path) -> Self {
        Self {
            tool: "dota",
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            configs,
            seed,
            output_dir: out.display().to_string(),
            timestamp: timestamp(),
        }
    }
}

fn timestamp() -> String {
    let from_env = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0));
    from_env.unwrap_or_else(chrono::Utc::now).to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: u32,
    pub manifest: &'a RunManifest,
    #[serde(flatten)]
    pub body: &'a T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(dir: &Path, stem: &str, manifest: &RunManifest, body: &T) -> Result<PathBuf> {
    let env = Envelope { schema_version: SCHEMA_VERSION, manifest, body };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    let path = dir.join(format!("{stem}.json"));
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

/// A flat table: fixed header order, one record per row.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path, stem: &str) -> Result<PathBuf> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
        let path = dir.join(format!("{stem}.csv"));
        write_atomic(&path, &bytes)?;
        Ok(path)
    }
}

/// Shortest round-trip representation, same as the JSON output.
pub fn num(v: f64) -> String {
    serde_json::to_string(&v).unwrap_or_else(|_| "NaN".into())
}
