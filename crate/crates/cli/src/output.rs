//! Output directory handling: resolved configs, manifests and artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const RESOLVED_CONFIG: &str = "resolved_config.json";
pub const MANIFEST: &str = "manifest.json";

/// Record of one invocation. `config_digest` is the SHA-256 of the bytes
/// of the resolved-config file written next to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub master_seed: u64,
    /// Artifact file names relative to the output directory.
    pub artifacts: Vec<String>,
    pub tool_version: String,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Pretty JSON with a trailing newline.
pub fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(egmtl::Error::from)?;
    out.push(b'\n');
    Ok(out)
}

/// Finishes an in-memory CSV writer.
pub fn csv_bytes(wtr: csv::Writer<Vec<u8>>) -> CliResult<Vec<u8>> {
    wtr.into_inner()
        .map_err(|e| CliError::Core(egmtl::Error::InvalidInput(format!("csv: {e}"))))
}

/// Collects the artifacts of a command and writes them with the manifest.
pub struct OutputDir {
    root: PathBuf,
    artifacts: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.artifacts.push(name.to_string());
        log::info!("wrote {}", path.display());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        self.write(name, &json_bytes(value)?)
    }

    /// Writes the resolved config and the manifest pointing at it.
    pub fn finish<C: Serialize>(self, command: &str, config: &C, master_seed: u64) -> CliResult<RunManifest> {
        let bytes = json_bytes(config)?;
        let path = self.path(RESOLVED_CONFIG);
        fs::write(&path, &bytes).map_err(|e| CliError::io(&path, e))?;
        let manifest = RunManifest {
            command: command.to_string(),
            config_digest: digest(&bytes),
            master_seed,
            artifacts: self.artifacts,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let path = self.root.join(MANIFEST);
        fs::write(&path, json_bytes(&manifest)?).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}
