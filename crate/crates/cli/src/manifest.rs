//! Artifact writing with checksums and per-stage timings.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub millis: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub cli_version: String,
    pub core_version: String,
    pub config: serde_json::Value,
    pub timings: Vec<StageTiming>,
    pub artifacts: Vec<Artifact>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Writes files into one output directory, recording each exactly once.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    names: BTreeSet<String>,
    artifacts: Vec<Artifact>,
    timings: Vec<StageTiming>,
}

impl ArtifactWriter {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            names: BTreeSet::new(),
            artifacts: Vec::new(),
            timings: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf, CliError> {
        assert!(
            name != MANIFEST_NAME && self.names.insert(name.to_string()),
            "artifact {name} written twice"
        );
        let bytes = contents.as_ref();
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        })?;
        self.artifacts.push(Artifact {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(path)
    }

    pub fn write_json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable report");
        text.push('\n');
        self.write(name, text)
    }

    /// Runs `f`, recording its wall time under `stage`.
    pub fn timed<R>(&mut self, stage: &str, f: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let out = f();
        self.record(stage, start);
        out
    }

    pub fn record(&mut self, stage: &str, start: Instant) {
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    pub fn finish<C: Serialize>(self, command: &str, config: &C) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            command: command.to_string(),
            cli_version: env!("CARGO_PKG_VERSION").to_string(),
            core_version: fcix_core::VERSION.to_string(),
            config: serde_json::to_value(config).expect("serializable config"),
            timings: self.timings,
            artifacts: self.artifacts,
        };
        let path = self.dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(&manifest).expect("serializable manifest");
        text.push('\n');
        std::fs::write(&path, text).map_err(|source| CliError::Output { path, source })?;
        Ok(manifest)
    }
}
