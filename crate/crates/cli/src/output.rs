//! CSV tables with a metadata line, and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Output directory that remembers every file it wrote, so a failed run can
/// remove them.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

/// A table as read back: metadata pairs from the first line, column names and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

impl OutputDir {
    pub fn create(root: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }

    /// Writes `name` as `# k=v ...` followed by a CSV header and rows.
    pub fn table(
        &mut self,
        name: &str,
        meta: &[(&str, String)],
        header: &[&str],
        rows: &[Vec<String>],
    ) -> std::io::Result<()> {
        let mut text = String::from("#");
        for (k, v) in meta {
            debug_assert!(!v.contains(char::is_whitespace) && !v.contains('='));
            text.push_str(&format!(" {k}={v}"));
        }
        text.push('\n');
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        text.push_str(std::str::from_utf8(&w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"));
        self.write(name, &text)
    }

    pub fn write(&mut self, name: &str, text: &str) -> std::io::Result<()> {
        // record first so a partially written file is still cleaned up
        self.written.push(name.to_string());
        fs::write(self.root.join(name), text)
    }

    /// Removes every file written so far.
    pub fn discard(&mut self) {
        for f in self.written.drain(..) {
            let _ = fs::remove_file(self.root.join(f));
        }
    }
}

/// Parses a table written by [`OutputDir::table`].
pub fn read_table(path: &Path) -> Result<Table, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let (first, body) = text.split_once('\n').ok_or("missing metadata line")?;
    let meta_text = first.strip_prefix('#').ok_or("metadata line must start with `#`")?;
    let mut meta = BTreeMap::new();
    for pair in meta_text.split_whitespace() {
        let (k, v) = pair.split_once('=').ok_or_else(|| format!("bad metadata entry `{pair}`"))?;
        meta.insert(k.to_string(), v.to_string());
    }
    let mut r = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let header: Vec<String> = r.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        rows.push(rec.iter().map(String::from).collect());
    }
    Ok(Table { meta, header, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub scenario: String,
    /// SHA-256 of the resolved scenario (file plus overrides) in canonical form.
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub overrides: Vec<String>,
    pub outputs: Vec<String>,
}

pub fn config_hash(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
