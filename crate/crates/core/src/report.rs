//! Shared helpers for emitted reports: rounding, file writing, digests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Rounds to three decimals, halves away from zero.
///
/// The tiny nudge keeps decimal halves such as 0.0025, which are stored just
/// below the half, rounding up as they would by hand.
pub fn round3(x: f64) -> f64 {
    let scaled = x.abs() * 1000.0;
    let rounded = (scaled + 0.5 + 1e-9).floor() / 1000.0;
    if x < 0.0 {
        -rounded
    } else {
        rounded
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Writes files under one root and records a manifest of what it wrote.
#[derive(Debug)]
pub struct ReportWriter {
    root: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl ReportWriter {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(ReportWriter {
            root,
            entries: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `contents` to `relative` (forward slashes) under the root.
    pub fn write(&mut self, relative: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let contents = contents.as_ref();
        let path = self.root.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.entries.push(ManifestEntry {
            path: relative.to_string(),
            sha256: hex::encode(Sha256::digest(contents)),
            bytes: contents.len(),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, relative: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(relative, text)
    }

    /// Writes `manifest.json` and returns the entries, sorted by path.
    pub fn finish(mut self) -> Result<Vec<ManifestEntry>> {
        self.entries.sort_by(|a, b| a.path.cmp(&b.path));
        let entries = self.entries.clone();
        self.write_json("manifest.json", &entries)?;
        Ok(entries)
    }
}
