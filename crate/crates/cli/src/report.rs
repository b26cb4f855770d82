//! Machine-readable output: key=value report blocks on standard output and
//! CSV files with a header row. All floats use six significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
pub use boundary_forest::scaling::sig6;

/// An ordered key=value block.
#[derive(Debug, Default, Clone)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.push(key, sig6(value));
    }

    pub fn push_u64(&mut self, key: &str, value: u64) {
        self.push(key, value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.entries {
            let _ = writeln!(out, "{key}={value}");
        }
        out
    }

    /// Append another block's lines verbatim (e.g. a fit report).
    pub fn push_block(&mut self, block: &str) {
        for line in block.lines() {
            if let Some((key, value)) = line.split_once('=') {
                self.push(key, value);
            }
        }
    }
}

/// Write a CSV file given a header and row cells.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::with_capacity(rows.len() * 16 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}
