//! Run manifests and the locked output directory.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, Subcommand};
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
const LOCK_FILE: &str = ".ergokit.lock";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit: String,
    pub version: String,
    pub subcommand: String,
    pub config: BTreeMap<String, String>,
    pub outputs: Vec<OutputEntry>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("manifest {}: {e}", path.display())))
    }

    pub fn subcommand(&self) -> Result<Subcommand, CliError> {
        Subcommand::parse(&self.subcommand).ok_or_else(|| CliError::Config(format!("manifest names unknown subcommand '{}'", self.subcommand)))
    }

    pub fn config_layer(&self) -> Vec<(String, String)> {
        self.config.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    /// Files whose hashes differ from (or are missing in) `other`.
    pub fn mismatches(&self, other: &RunManifest) -> Vec<String> {
        let theirs: BTreeMap<&str, &str> = other.outputs.iter().map(|o| (o.file.as_str(), o.sha256.as_str())).collect();
        let mut bad: Vec<String> = self
            .outputs
            .iter()
            .filter(|o| theirs.get(o.file.as_str()) != Some(&o.sha256.as_str()))
            .map(|o| o.file.clone())
            .collect();
        let ours: Vec<&str> = self.outputs.iter().map(|o| o.file.as_str()).collect();
        bad.extend(other.outputs.iter().filter(|o| !ours.contains(&o.file.as_str())).map(|o| o.file.clone()));
        bad
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Exclusive output directory: holds a lock file for its lifetime and
/// records every file written through it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    outputs: Vec<OutputEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", root.display())))?;
        let lock = root.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(CliError::Runtime(format!(
                    "output directory {} is locked by another run (remove {} if stale)",
                    root.display(),
                    lock.display()
                )))
            }
            Err(e) => return Err(CliError::Runtime(format!("cannot lock {}: {e}", root.display()))),
        }
        Ok(OutputDir { root: root.to_path_buf(), outputs: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `name` from an in-memory buffer produced by `fill`.
    pub fn write_with<F>(&mut self, name: &str, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<(), CliError>,
    {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        self.write_bytes(name, &buf)
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        let mut f = File::create(&path).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        f.write_all(bytes).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.retain(|o| o.file != name);
        self.outputs.push(OutputEntry { file: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    /// Writes `manifest.json` for `cfg` and returns it.
    pub fn finish(mut self, cfg: &RunConfig) -> Result<RunManifest, CliError> {
        let mut outputs = std::mem::take(&mut self.outputs);
        outputs.sort_by(|a, b| a.file.cmp(&b.file));
        let manifest = RunManifest {
            toolkit: "ergokit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: cfg.subcommand.name().into(),
            config: cfg.values.clone(),
            outputs,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
        let path = self.root.join(MANIFEST_FILE);
        fs::write(&path, text + "\n").map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        Ok(manifest)
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(self.root.join(LOCK_FILE));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = tempfile::tempdir().unwrap();
        let a = OutputDir::create(dir.path()).unwrap();
        assert!(matches!(OutputDir::create(dir.path()), Err(CliError::Runtime(_))));
        drop(a);
        let mut b = OutputDir::create(dir.path()).unwrap();
        b.write_bytes("x.csv", b"t,value\n").unwrap();
        let cfg = RunConfig::resolve(Subcommand::Cover, &[]).unwrap();
        let m = b.finish(&cfg).unwrap();
        assert_eq!(m.outputs.len(), 1);
        assert_eq!(m.outputs[0].sha256, sha256_hex(b"t,value\n"));
        assert!(!dir.path().join(LOCK_FILE).exists());
        let back = RunManifest::load(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(back, m);
        assert!(back.mismatches(&m).is_empty());
    }
}
