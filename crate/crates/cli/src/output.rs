//! Output directories with a digest manifest and cleanup on failure.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Everything needed to reproduce a run. Deliberately free of timestamps and
/// absolute output paths so identical reruns produce identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub master_seed: Option<u64>,
    pub config: serde_json::Value,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects the files of one run. Unless [`OutputDir::finish`] succeeds, every
/// file written through it (and the directory, if this run created it) is
/// removed when it is dropped.
pub struct OutputDir {
    root: PathBuf,
    created_root: bool,
    created_dirs: Vec<PathBuf>,
    written: Vec<String>,
    finished: bool,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        let existed = root.exists();
        if existed && !root.is_dir() {
            bail!("output path {} exists and is not a directory", root.display());
        }
        if existed && root.join(MANIFEST_NAME).exists() {
            // a rerun into the same directory replaces the previous run's manifest
            fs::remove_file(root.join(MANIFEST_NAME))
                .with_context(|| format!("cannot replace manifest in {}", root.display()))?;
        }
        fs::create_dir_all(root).with_context(|| format!("cannot create output directory {}", root.display()))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            created_root: !existed,
            created_dirs: Vec::new(),
            written: Vec::new(),
            finished: false,
        })
    }

    /// Writes `bytes` to `rel` (a `/`-separated path below the root).
    pub fn write(&mut self, rel: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        if rel == MANIFEST_NAME || self.written.iter().any(|w| w == rel) {
            bail!("output {rel} written twice");
        }
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            if !parent.exists() {
                fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
                self.created_dirs.push(parent.to_path_buf());
            }
        }
        fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.written.push(rel.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(rel, s)
    }

    /// Serialises `rows` as CSV with a header derived from the row type.
    pub fn write_csv<T: Serialize>(&mut self, rel: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
        self.write(rel, bytes)
    }

    /// Digests every output, writes the manifest and re-reads the outputs to
    /// confirm the digests.
    pub fn finish(mut self, command: &str, master_seed: Option<u64>, config: serde_json::Value) -> Result<RunManifest> {
        let mut names = self.written.clone();
        names.sort();
        let outputs = names
            .iter()
            .map(|rel| {
                let bytes = fs::read(self.root.join(rel))?;
                Ok(OutputDigest {
                    path: rel.clone(),
                    sha256: sha256_hex(&bytes),
                    bytes: bytes.len() as u64,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let manifest = RunManifest {
            tool: "repteach".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            master_seed,
            config,
            outputs,
        };
        let mut s = serde_json::to_string_pretty(&manifest)?;
        s.push('\n');
        fs::write(self.root.join(MANIFEST_NAME), s)?;
        verify_manifest(&self.root)?;
        self.finished = true;
        Ok(manifest)
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        if self.finished {
            return;
        }
        for rel in &self.written {
            let _ = fs::remove_file(self.root.join(rel));
        }
        let _ = fs::remove_file(self.root.join(MANIFEST_NAME));
        for dir in self.created_dirs.iter().rev() {
            let _ = fs::remove_dir(dir);
        }
        if self.created_root {
            let _ = fs::remove_dir(&self.root);
        }
    }
}

/// Checks every digest recorded in `dir`'s manifest against the files on disk.
pub fn verify_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
    let manifest: RunManifest = serde_json::from_str(&text)?;
    for out in &manifest.outputs {
        let bytes = fs::read(dir.join(&out.path)).with_context(|| format!("missing output {}", out.path))?;
        if sha256_hex(&bytes) != out.sha256 {
            bail!("digest mismatch for {}", out.path);
        }
    }
    Ok(manifest)
}
