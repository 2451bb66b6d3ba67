//! Run manifests: written at start, finalized with checksums of every
//! artifact after the run. Timestamps are the only non-reproducible entries;
//! all data outputs are byte-stable for fixed config and seed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    pub started_unix_ms: u128,
    pub finished_unix_ms: Option<u128>,
    pub status: String,
    pub config: RunConfig,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn file_record(base: &Path, path: &Path) -> std::io::Result<FileRecord> {
    let bytes = fs::read(path)?;
    let rel = path
        .strip_prefix(base)
        .unwrap_or(path)
        .to_string_lossy()
        .into_owned();
    Ok(FileRecord {
        path: rel,
        bytes: bytes.len() as u64,
        sha256: sha256_hex(&bytes),
    })
}

pub struct ManifestWriter {
    out_dir: PathBuf,
    manifest: Manifest,
}

impl ManifestWriter {
    /// Write the initial (status: running) manifest before any computation.
    pub fn start(
        out_dir: &Path,
        command: &str,
        config: &RunConfig,
        seed: u64,
        threads: usize,
        inputs: &[PathBuf],
    ) -> std::io::Result<Self> {
        fs::create_dir_all(out_dir)?;
        let input_records = inputs
            .iter()
            .filter_map(|p| file_record(out_dir, p).ok())
            .collect();
        let manifest = Manifest {
            tool: "ymqm".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            threads,
            started_unix_ms: now_ms(),
            finished_unix_ms: None,
            status: "running".into(),
            config: config.clone(),
            inputs: input_records,
            outputs: Vec::new(),
        };
        let writer = Self {
            out_dir: out_dir.to_path_buf(),
            manifest,
        };
        writer.write()?;
        Ok(writer)
    }

    /// Re-read every artifact, record checksums, mark complete.
    pub fn finalize(mut self, outputs: &[PathBuf]) -> std::io::Result<()> {
        self.manifest.outputs = outputs
            .iter()
            .map(|p| file_record(&self.out_dir, p))
            .collect::<std::io::Result<Vec<_>>>()?;
        self.manifest.finished_unix_ms = Some(now_ms());
        self.manifest.status = "complete".into();
        self.write()
    }

    fn write(&self) -> std::io::Result<()> {
        let path = self.out_dir.join("manifest.json");
        let mut f = fs::File::create(path)?;
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        f.write_all(text.as_bytes())?;
        f.write_all(b"\n")
    }
}
