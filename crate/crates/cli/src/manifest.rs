//! Run manifest: config hash, tool version, artifact checksums and timings.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub artifacts: Vec<Artifact>,
    /// `(phase, seconds)` in execution order.
    pub timings: Vec<(String, f64)>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the effective configuration in its canonical TOML form.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    sha256_hex(cfg.to_toml().as_bytes())
}

fn list_artifacts(dir: &Path) -> Result<Vec<Artifact>, CliError> {
    let mut names: Vec<String> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().map(|t| t.is_file()).unwrap_or(false))
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|name| name != MANIFEST_NAME)
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|file| {
            let bytes = std::fs::read(dir.join(&file))?;
            Ok(Artifact {
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
                file,
            })
        })
        .collect()
}

/// Write the manifest covering every file currently in `dir`. Call last.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    cfg: &ExperimentConfig,
    timings: Vec<(String, f64)>,
) -> Result<RunManifest, CliError> {
    let manifest = RunManifest {
        command: command.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(cfg),
        seed: cfg.seed,
        artifacts: list_artifacts(dir)?,
        timings,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(dir.join(MANIFEST_NAME), text + "\n")?;
    Ok(manifest)
}

/// Names of files whose presence or checksum disagrees with the manifest.
pub fn check_manifest(dir: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(dir.join(MANIFEST_NAME))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("unreadable manifest: {e}")))?;
    let actual = list_artifacts(dir)?;
    let mut bad = Vec::new();
    for a in &actual {
        if !manifest.artifacts.contains(a) {
            bad.push(a.file.clone());
        }
    }
    for a in &manifest.artifacts {
        if !actual.iter().any(|x| x.file == a.file) {
            bad.push(a.file.clone());
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.csv"), "x\n1\n").unwrap();
        std::fs::write(dir.path().join("b.csv"), "y\n2\n").unwrap();
        let m = write_manifest(dir.path(), "test", &ExperimentConfig::default(), vec![]).unwrap();
        assert_eq!(m.artifacts.len(), 2);
        assert!(check_manifest(dir.path()).unwrap().is_empty());
        std::fs::write(dir.path().join("b.csv"), "y\n3\n").unwrap();
        assert_eq!(check_manifest(dir.path()).unwrap(), vec!["b.csv".to_string()]);
    }
}
