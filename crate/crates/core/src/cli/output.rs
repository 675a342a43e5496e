//! CSV and JSON writers that record a SHA-256 digest of every file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest.iter() {
        write!(s, "{b:02x}").expect("writing to a String");
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub rows: usize,
}

/// Collects files written into one output directory.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileRecord>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }

    fn write(&mut self, name: &str, text: String, rows: usize) -> Result<()> {
        fs::write(self.root.join(name), &text)?;
        self.files.push(FileRecord {
            name: name.into(),
            sha256: hex_digest(text.as_bytes()),
            rows,
        });
        Ok(())
    }

    /// One header line, then one line per row. Floats use the shortest
    /// representation that round-trips exactly.
    pub fn csv<R: AsRef<[String]>>(&mut self, name: &str, header: &[String], rows: &[R]) -> Result<()> {
        let mut text = header.join(",");
        text.push('\n');
        for r in rows {
            text.push_str(&r.as_ref().join(","));
            text.push('\n');
        }
        self.write(name, text, rows.len())
    }

    /// Numeric matrix with the given column names.
    pub fn matrix(&mut self, name: &str, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
        let rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect())
            .collect();
        self.csv(name, header, &rows)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| crate::Error::Config(e.to_string()))?;
        self.write(name, text + "\n", 1)
    }
}

pub fn columns(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}
