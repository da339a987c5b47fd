//! Checksummed run manifests and the output-directory lock.

use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "MANIFEST";
pub const LOCK_FILE: &str = ".progtrans.lock";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Tool version, configuration hash, input checksums and one entry per
/// artifact. Contains no timestamps or absolute paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub tool: String,
    pub config_sha256: String,
    pub inputs: Vec<ArtifactEntry>,
    pub artifacts: Vec<ArtifactEntry>,
}

impl Manifest {
    pub fn new(config_canonical: &str) -> Self {
        Manifest {
            tool: format!("progtrans {}", env!("CARGO_PKG_VERSION")),
            config_sha256: sha256_hex(config_canonical.as_bytes()),
            inputs: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    fn entry(name: &str, path: &Path) -> Result<ArtifactEntry> {
        let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        Ok(ArtifactEntry { name: name.to_string(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 })
    }

    pub fn add_input(&mut self, name: &str, path: &Path) -> Result<()> {
        self.inputs.push(Manifest::entry(name, path)?);
        Ok(())
    }

    /// Records `dir/name`.
    pub fn add_artifact(&mut self, dir: &Path, name: &str) -> Result<()> {
        self.artifacts.push(Manifest::entry(name, &dir.join(name))?);
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# progtrans run manifest\n");
        let _ = writeln!(out, "tool\t{}", self.tool);
        let _ = writeln!(out, "config\t{}", self.config_sha256);
        for e in &self.inputs {
            let _ = writeln!(out, "input\t{}\t{}\t{}", e.name, e.sha256, e.bytes);
        }
        for e in &self.artifacts {
            let _ = writeln!(out, "artifact\t{}\t{}\t{}", e.name, e.sha256, e.bytes);
        }
        out
    }

    pub fn artifact(&self, name: &str) -> Option<&ArtifactEntry> {
        self.artifacts.iter().find(|e| e.name == name)
    }

    /// Re-hashes every artifact under `dir` and lists the names that differ.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for e in &self.artifacts {
            if Manifest::entry(&e.name, &dir.join(&e.name))? != *e {
                bad.push(e.name.clone());
            }
        }
        Ok(bad)
    }
}

/// Exclusive ownership of an output directory for the life of the value.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(OutputLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => bail!(
                "{} is locked by another run (remove {} if no run is active)",
                dir.display(),
                path.display()
            ),
            Err(e) => Err(e).with_context(|| format!("cannot create {}", path.display())),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = tempfile::tempdir().unwrap();
        let lock = OutputLock::acquire(dir.path()).unwrap();
        assert!(OutputLock::acquire(dir.path()).is_err());
        drop(lock);
        assert!(OutputLock::acquire(dir.path()).is_ok());
    }

    #[test]
    fn manifest_text_and_verify() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a"), "hello\n").unwrap();
        let mut m = Manifest::new("merges = 1\n");
        m.add_artifact(dir.path(), "a").unwrap();
        let text = m.to_text();
        assert!(text.contains("artifact\ta\t"));
        assert!(m.verify(dir.path()).unwrap().is_empty());
        fs::write(dir.path().join("a"), "changed\n").unwrap();
        assert_eq!(m.verify(dir.path()).unwrap(), ["a"]);
    }
}
