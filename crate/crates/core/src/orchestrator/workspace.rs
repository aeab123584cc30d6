use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use super::record::{GenerationSummary, MergeStatus};
use crate::error::OrchestratorError;
use crate::strategies::StrategyKey;

/// Durable marker for a build awaiting a human fix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub file: String,
    pub prefix_t: usize,
    pub strategy: StrategyKey,
    pub build_stdout_path: PathBuf,
    pub build_stderr_path: PathBuf,
    pub created_at: DateTime<Utc>,
    pub function: String,
    #[serde(default)]
    pub helpers: Vec<String>,
    /// Copy of the file as merged, before any human edit.
    pub llm_merged_path: PathBuf,
    pub generation: GenerationSummary,
    pub merge_status: MergeStatus,
    pub started_at: DateTime<Utc>,
    pub generation_elapsed_s: f64,
}

/// Directory layout of one run:
///
/// ```text
/// <root>/.lock
/// <root>/CHECKPOINT.json
/// <root>/records.jsonl
/// <root>/shadow/<strategy>/...        working copy of the project
/// <root>/prompts/<file>/<strategy>/<t>.txt
/// <root>/merged/<strategy>/<file>/<t>/<name>
/// <root>/logs/<strategy>/<file>/<t>/build.{stdout,stderr}.log
/// <root>/variants/<strategy>/<file>/<t>/
/// <root>/transcripts/
/// ```
#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, OrchestratorError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(OrchestratorError::io(&root))?;
        let root = root.canonicalize().map_err(OrchestratorError::io(&root))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.root.join("CHECKPOINT.json")
    }

    pub fn records_path(&self) -> PathBuf {
        self.root.join("records.jsonl")
    }

    pub fn transcripts_dir(&self) -> PathBuf {
        self.root.join("transcripts")
    }

    pub fn shadow_root(&self, strategy: &StrategyKey) -> PathBuf {
        self.root.join("shadow").join(strategy.name())
    }

    pub fn prompt_path(&self, file: &str, strategy: &StrategyKey, t: usize) -> PathBuf {
        self.root
            .join("prompts")
            .join(file)
            .join(strategy.name())
            .join(format!("{t}.txt"))
    }

    pub fn step_dir(&self, kind: &str, strategy: &StrategyKey, file: &str, t: usize) -> PathBuf {
        self.root
            .join(kind)
            .join(strategy.name())
            .join(file)
            .join(t.to_string())
    }

    pub fn lock(&self) -> Result<WorkspaceLock, OrchestratorError> {
        let path = self.root.join(".lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(WorkspaceLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(OrchestratorError::WorkspaceLocked(self.root.clone()))
            }
            Err(e) => Err(OrchestratorError::io(path)(e)),
        }
    }

    pub fn read_checkpoint(&self) -> Result<Option<Checkpoint>, OrchestratorError> {
        let path = self.checkpoint_path();
        match fs::read_to_string(&path) {
            Ok(raw) => serde_json::from_str(&raw)
                .map(Some)
                .map_err(OrchestratorError::json(path)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(OrchestratorError::io(path)(e)),
        }
    }

    pub fn write_checkpoint(&self, cp: &Checkpoint) -> Result<(), OrchestratorError> {
        let path = self.checkpoint_path();
        let json = serde_json::to_string_pretty(cp).map_err(OrchestratorError::json(&path))?;
        write_file(&path, json.as_bytes())
    }

    pub fn clear_checkpoint(&self) -> Result<(), OrchestratorError> {
        let path = self.checkpoint_path();
        fs::remove_file(&path).map_err(OrchestratorError::io(path))
    }

    /// Creates the strategy's shadow tree from `pristine` unless it exists.
    pub fn ensure_shadow(
        &self,
        strategy: &StrategyKey,
        pristine: &Path,
    ) -> Result<PathBuf, OrchestratorError> {
        let shadow = self.shadow_root(strategy);
        if !shadow.exists() {
            let pristine = pristine.canonicalize().map_err(OrchestratorError::io(pristine))?;
            copy_tree(&pristine, &shadow, &self.root)?;
        }
        Ok(shadow)
    }
}

/// Removes the lock file on drop.
#[derive(Debug)]
pub struct WorkspaceLock {
    path: PathBuf,
}

impl Drop for WorkspaceLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), OrchestratorError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(OrchestratorError::io(parent))?;
    }
    fs::write(path, bytes).map_err(OrchestratorError::io(path))
}

/// Copies `from` into `to`, skipping `skip` (the workspace may live inside the project).
fn copy_tree(from: &Path, to: &Path, skip: &Path) -> Result<(), OrchestratorError> {
    let walker = WalkDir::new(from)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.path() != skip);
    for entry in walker {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(from).to_path_buf();
            OrchestratorError::io(path)(e.into())
        })?;
        let rel = entry.path().strip_prefix(from).expect("walk stays under root");
        let dest = to.join(rel);
        if entry.file_type().is_dir() {
            fs::create_dir_all(&dest).map_err(OrchestratorError::io(&dest))?;
        } else if entry.file_type().is_file() {
            fs::copy(entry.path(), &dest).map_err(OrchestratorError::io(&dest))?;
        }
    }
    Ok(())
}

/// Content hash of a directory tree (relative paths and file bytes).
pub fn tree_hash(root: &Path) -> Result<String, OrchestratorError> {
    let mut hasher = Sha256::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| OrchestratorError::io(root)(e.into()))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(root).unwrap_or(entry.path());
        hasher.update(rel.to_string_lossy().as_bytes());
        hasher.update([0u8]);
        let bytes = fs::read(entry.path()).map_err(OrchestratorError::io(entry.path()))?;
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hex::encode(hasher.finalize()))
}
