use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::hex_digest;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSeeds {
    pub cell: usize,
    pub label: String,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub master_seed: u64,
    pub network_seed: u64,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub jobs: usize,
    pub wall_time_secs: f64,
    pub cells: Vec<CellSeeds>,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Writes result files into one directory and remembers their hashes.
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry {
            path: name.to_string(),
            sha256: hex_digest(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Builds a CSV in memory with `header` and the rows produced by `fill`.
    pub fn write_csv<F>(&mut self, name: &str, header: &[&str], fill: F) -> Result<()>
    where
        F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        fill(&mut w)?;
        let bytes = w.into_inner().map_err(|e| Error::Input(e.to_string()))?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    /// Writes `manifest.json`, which is not listed in itself.
    pub fn finish(self, mut manifest: Manifest) -> Result<Manifest> {
        manifest.files = self.files;
        let path = self.dir.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

/// Formats an optional number as an empty CSV field when absent.
pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
