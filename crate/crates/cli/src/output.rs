//! CSV tables and the run manifest.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{Format, RunConfig};

/// Rectangular table of already formatted cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Leading columns that identify a row; the rest are melted in long format.
    pub id_columns: usize,
}

impl Table {
    pub fn new(name: &str, header: &[&str], id_columns: usize) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: vec![], id_columns }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Long format: the id columns, then `variable,value` once per other column.
    pub fn melt(&self) -> Table {
        let mut header: Vec<&str> = self.header[..self.id_columns].iter().map(String::as_str).collect();
        header.extend(["variable", "value"]);
        let mut long = Table::new(&format!("{}_long", self.name), &header, self.id_columns + 1);
        for row in &self.rows {
            for (col, value) in self.header.iter().zip(row).skip(self.id_columns) {
                let mut r = row[..self.id_columns].to_vec();
                r.push(col.clone());
                r.push(value.clone());
                long.push(r);
            }
        }
        long
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let line = |cells: &[String]| cells.iter().map(|c| escape(c)).collect::<Vec<_>>().join(",");
        writeln!(out, "{}", line(&self.header)).expect("writing to a string");
        for row in &self.rows {
            writeln!(out, "{}", line(row)).expect("writing to a string");
        }
        out
    }
}

fn escape(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Shortest round-trip representation; empty for "not applicable".
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
    pub rows: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub schema_version: u64,
    pub experiment: &'static str,
    pub code_version: &'static str,
    pub git_hash: &'static str,
    pub config_path: Option<String>,
    pub config_digest: String,
    pub config: RunConfig,
    pub seed_override: Option<u64>,
    pub base_seed: u64,
    pub seeds: Vec<u64>,
    pub workers: usize,
    pub wall_time_seconds: f64,
    pub files: Vec<FileEntry>,
    pub warnings: Vec<String>,
    /// Field paths filled from defaults.
    pub defaulted: Vec<String>,
    pub failures: usize,
    pub exit_status: i32,
    pub summary: serde_json::Value,
}

pub fn git_hash() -> &'static str {
    option_env!("HALLNUM_GIT_HASH").filter(|h| !h.is_empty()).unwrap_or("unknown")
}

/// Digest of the resolved configuration, independent of whitespace and key order in the file.
pub fn config_digest(config: &RunConfig) -> String {
    sha256_hex(serde_json::to_string(config).expect("config serializes").as_bytes())
}

/// Writes the tables in the requested formats and returns their manifest entries.
pub fn write_tables(dir: &Path, tables: &[Table], formats: &[Format]) -> std::io::Result<Vec<FileEntry>> {
    std::fs::create_dir_all(dir)?;
    let mut entries = vec![];
    for t in tables {
        let mut variants = vec![];
        if formats.contains(&Format::Csv) {
            variants.push(t.clone());
        }
        if formats.contains(&Format::LongCsv) {
            variants.push(t.melt());
        }
        for v in variants {
            let path: PathBuf = dir.join(format!("{}.csv", v.name));
            let text = v.to_csv();
            std::fs::write(&path, &text)?;
            entries.push(FileEntry {
                path: path.file_name().expect("file name").to_string_lossy().into_owned(),
                sha256: sha256_hex(text.as_bytes()),
                bytes: text.len(),
                rows: v.rows.len(),
            });
        }
    }
    Ok(entries)
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(dir.join("manifest.json"), text + "\n")
}
