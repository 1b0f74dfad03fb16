//! Experiment directory: a manifest binding every artifact by relative path
//! and 64-bit content hash.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::fnv1a64;

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const LOCK_FILE: &str = ".lock";

/// Relative path plus FNV-1a 64 content hash (hex).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRef {
    pub path: String,
    pub hash: String,
}

pub fn content_hash(bytes: &[u8]) -> String {
    format!("{:016x}", fnv1a64(bytes))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub schema_version: u32,
    pub seed: u64,
    pub scenario: Option<FileRef>,
    pub audio_manifest: Option<FileRef>,
    pub audio_channels: Vec<FileRef>,
    pub mic_map: Option<FileRef>,
    pub ground_truth: Option<FileRef>,
    /// Scripts of the scenes rendered for training (spec, noise and seed each).
    pub training_scenes: Vec<FileRef>,
    /// Labelled windows with their split assignment.
    pub dataset: Option<FileRef>,
    /// Window features in the row order train, validation, test.
    pub features: Option<FileRef>,
    /// Window count per split.
    pub splits: BTreeMap<String, usize>,
    pub checkpoints: BTreeMap<String, FileRef>,
    pub predictions: Option<FileRef>,
    pub reports: BTreeMap<String, FileRef>,
    /// Configuration files each stage ran with.
    pub configs: BTreeMap<String, FileRef>,
}

impl ExperimentManifest {
    pub fn new(seed: u64) -> Self {
        Self {
            schema_version: MANIFEST_VERSION,
            seed,
            ..Default::default()
        }
    }

    pub fn file_refs(&self) -> Vec<&FileRef> {
        let mut out: Vec<&FileRef> = [&self.scenario, &self.audio_manifest, &self.mic_map, &self.ground_truth, &self.dataset, &self.features, &self.predictions]
            .into_iter()
            .flatten()
            .collect();
        out.extend(&self.audio_channels);
        out.extend(&self.training_scenes);
        out.extend(self.checkpoints.values());
        out.extend(self.reports.values());
        out.extend(self.configs.values());
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// An experiment directory and its manifest.
#[derive(Debug, Clone)]
pub struct Experiment {
    root: PathBuf,
    pub manifest: ExperimentManifest,
}

impl Experiment {
    /// Starts a fresh manifest in `root` (created if needed). Existing files are left alone.
    pub fn create(root: &Path, seed: u64) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            manifest: ExperimentManifest::new(seed),
        })
    }

    /// Loads the manifest and checks that every referenced file exists with the recorded hash.
    pub fn open(root: &Path) -> Result<Self> {
        let path = root.join(MANIFEST_FILE);
        if !path.exists() {
            return Err(Error::MissingFile(path));
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: ExperimentManifest = serde_json::from_str(&text)?;
        if manifest.schema_version != MANIFEST_VERSION {
            return Err(Error::data(format!(
                "{}: unsupported manifest schema_version {}",
                path.display(),
                manifest.schema_version
            )));
        }
        let exp = Self {
            root: root.to_path_buf(),
            manifest,
        };
        exp.verify()?;
        Ok(exp)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn verify(&self) -> Result<()> {
        for f in self.manifest.file_refs() {
            let actual = self.hash_file(&f.path)?;
            if actual != f.hash {
                return Err(Error::data(format!(
                    "{}: content hash {actual} does not match manifest {}",
                    f.path, f.hash
                )));
            }
        }
        Ok(())
    }

    fn hash_file(&self, rel: &str) -> Result<String> {
        let p = self.path(rel);
        if !p.exists() {
            return Err(Error::MissingFile(p));
        }
        let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
        Ok(content_hash(&bytes))
    }

    /// Hashes an existing file under the root.
    pub fn file_ref(&self, rel: &str) -> Result<FileRef> {
        Ok(FileRef {
            path: rel.to_string(),
            hash: self.hash_file(rel)?,
        })
    }

    pub fn write_bytes(&self, rel: &str, bytes: &[u8]) -> Result<FileRef> {
        let p = self.path(rel);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
        Ok(FileRef {
            path: rel.to_string(),
            hash: content_hash(bytes),
        })
    }

    /// Pretty JSON with a trailing newline.
    pub fn write_json<T: Serialize>(&self, rel: &str, value: &T) -> Result<FileRef> {
        self.write_bytes(rel, (serde_json::to_string_pretty(value)? + "\n").as_bytes())
    }

    pub fn read_json<T: for<'de> Deserialize<'de>>(&self, rel: &str) -> Result<T> {
        let p = self.path(rel);
        if !p.exists() {
            return Err(Error::MissingFile(p));
        }
        let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self) -> Result<()> {
        let p = self.path(MANIFEST_FILE);
        fs::write(&p, self.manifest.to_json()?).map_err(|e| Error::io(&p, e))
    }
}

/// Advisory lock held for the lifetime of the value.
#[derive(Debug)]
pub struct ExperimentLock {
    path: PathBuf,
}

impl ExperimentLock {
    pub fn acquire(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        let path = root.join(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::config(format!(
                "{} is locked by another invocation (remove {} if stale)",
                root.display(),
                path.display()
            ))),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for ExperimentLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
