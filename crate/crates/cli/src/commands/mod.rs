pub mod build;
pub mod equilibrate;
pub mod fit;
pub mod oracle;
pub mod spectrum;

use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::manifest::ManifestWriter;

pub struct CommandContext {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub threads: usize,
}

impl CommandContext {
    pub fn manifest(
        &self,
        command: &str,
        inputs: &[PathBuf],
    ) -> std::io::Result<ManifestWriter> {
        ManifestWriter::start(
            &self.out_dir,
            command,
            &self.config,
            self.seed,
            self.threads,
            inputs,
        )
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    std::fs::write(path, format!("{text}\n"))
}
