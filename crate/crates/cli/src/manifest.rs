use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Complete,
    /// The stage stopped early; listed artifacts may be incomplete.
    Partial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Relative to the output directory.
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figure: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub inputs: Vec<FileDigest>,
    pub parameters: serde_json::Value,
    pub artifacts: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> CliResult<(String, u64)> {
    let mut f = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = f.read(&mut buf).map_err(|e| CliError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        total += n as u64;
    }
    Ok((hex::encode(hasher.finalize()), total))
}

/// Digest of `path`, recorded relative to `root` when it lies inside it.
pub fn digest(root: &Path, path: &Path, figure: Option<u8>) -> CliResult<FileDigest> {
    let (sha256, bytes) = sha256_file(path)?;
    let rel = path.strip_prefix(root).unwrap_or(path).to_path_buf();
    Ok(FileDigest {
        path: rel,
        sha256,
        bytes,
        figure,
    })
}

/// Tracks the files a stage writes under `root/<stage>`.
pub struct StageOutput {
    pub stage: &'static str,
    pub root: PathBuf,
    pub dir: PathBuf,
    written: Vec<(PathBuf, Option<u8>)>,
    inputs: Vec<PathBuf>,
    pub parameters: serde_json::Value,
}

impl StageOutput {
    /// Clears any previous output of the stage and recreates its directory.
    pub fn create(root: &Path, stage: &'static str) -> CliResult<Self> {
        let dir = root.join(stage);
        if dir.exists() {
            std::fs::remove_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        }
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(StageOutput {
            stage,
            root: root.to_path_buf(),
            dir,
            written: Vec::new(),
            inputs: Vec::new(),
            parameters: serde_json::Value::Null,
        })
    }

    pub fn subdir(&self, name: &str) -> CliResult<PathBuf> {
        let d = self.dir.join(name);
        std::fs::create_dir_all(&d).map_err(|e| CliError::io(&d, e))?;
        Ok(d)
    }

    /// Registers a file for the manifest and returns its full path.
    pub fn file(&mut self, rel: impl AsRef<Path>) -> PathBuf {
        self.figure_file(rel, None)
    }

    pub fn figure_file(&mut self, rel: impl AsRef<Path>, figure: Option<u8>) -> PathBuf {
        let p = self.dir.join(rel);
        self.written.push((p.clone(), figure));
        p
    }

    pub fn input(&mut self, path: impl Into<PathBuf>) {
        self.inputs.push(path.into());
    }

    pub fn set_parameters<T: Serialize>(&mut self, p: &T) {
        self.parameters = serde_json::to_value(p).unwrap_or(serde_json::Value::Null);
    }

    /// Writes `manifest.json`. Registered files that were never created
    /// are left out; on failure the manifest is flagged partial.
    pub fn finish(self, error: Option<String>) -> CliResult<Manifest> {
        let mut artifacts = Vec::new();
        for (p, fig) in &self.written {
            if p.is_file() {
                artifacts.push(digest(&self.root, p, *fig)?);
            }
        }
        artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        let inputs = self
            .inputs
            .iter()
            .map(|p| digest(&self.root, p, None))
            .collect::<CliResult<Vec<_>>>()?;
        let manifest = Manifest {
            stage: self.stage.to_string(),
            status: if error.is_some() {
                Status::Partial
            } else {
                Status::Complete
            },
            error,
            inputs,
            parameters: self.parameters,
            artifacts,
        };
        let path = self.dir.join("manifest.json");
        equity_activity::io::write_json(&path, &manifest).map_err(|e| match e {
            equity_activity::Error::Io { path, source } => CliError::io(path, source),
            other => CliError::Validation(other.to_string()),
        })?;
        Ok(manifest)
    }
}
