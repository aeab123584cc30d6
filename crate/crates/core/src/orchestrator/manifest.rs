use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::OrchestratorError;
use crate::extractor::Language;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    pub path: PathBuf,
    pub language: Language,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectManifest {
    /// Project root; relative paths resolve against the manifest's directory.
    pub root: PathBuf,
    pub files: Vec<ManifestFile>,
    pub build_command: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub build_ok_pattern: Option<String>,
    pub variant_output_glob: String,
    #[serde(default)]
    pub strategies: Vec<String>,
    /// Glob patterns (relative to root) of files excluded from modification.
    #[serde(default)]
    pub exclude: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection_override: Option<BTreeMap<PathBuf, usize>>,
}

impl ProjectManifest {
    pub fn load(path: &Path) -> Result<Self, OrchestratorError> {
        let raw = std::fs::read_to_string(path).map_err(OrchestratorError::io(path))?;
        let mut manifest: Self = serde_json::from_str(&raw)
            .map_err(|e| OrchestratorError::Manifest(format!("{}: {e}", path.display())))?;
        if manifest.root.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            manifest.root = base.join(&manifest.root);
        }
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<(), OrchestratorError> {
        let bad = |m: String| Err(OrchestratorError::Manifest(m));
        if self.files.is_empty() {
            return bad("`files` is empty".into());
        }
        if self.build_command.first().is_none_or(|c| c.trim().is_empty()) {
            return bad("`build_command` is empty".into());
        }
        if self.variant_output_glob.trim().is_empty() {
            return bad("`variant_output_glob` is empty".into());
        }
        if let Some(p) = &self.build_ok_pattern {
            if let Err(e) = regex::Regex::new(p) {
                return bad(format!("`build_ok_pattern`: {e}"));
            }
        }
        if let Err(e) = glob::Pattern::new(&self.variant_output_glob) {
            return bad(format!("`variant_output_glob`: {e}"));
        }
        for pattern in &self.exclude {
            if let Err(e) = glob::Pattern::new(pattern) {
                return bad(format!("`exclude` pattern `{pattern}`: {e}"));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for f in &self.files {
            if f.path.is_absolute() || f.path.components().any(|c| c.as_os_str() == "..") {
                return bad(format!("file {} must be relative to root", f.path.display()));
            }
            if !seen.insert(&f.path) {
                return bad(format!("file {} listed twice", f.path.display()));
            }
        }
        if let Some(over) = &self.selection_override {
            if let Some(p) = over.keys().find(|p| !seen.contains(p)) {
                return bad(format!("selection_override names unknown file {}", p.display()));
            }
        }
        Ok(())
    }

    pub fn is_excluded(&self, path: &Path) -> bool {
        let opts = glob::MatchOptions {
            require_literal_separator: true,
            ..Default::default()
        };
        self.exclude.iter().any(|p| {
            glob::Pattern::new(p).is_ok_and(|p| p.matches_path_with(path, opts))
        })
    }

    pub fn source_path(&self, file: &Path) -> PathBuf {
        self.root.join(file)
    }
}

/// `/`-separated rendering of a manifest-relative path, used in records and
/// workspace directory names.
pub fn display_path(path: &Path) -> String {
    path.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(json: &str) -> Result<ProjectManifest, OrchestratorError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        std::fs::write(&path, json).unwrap();
        ProjectManifest::load(&path)
    }

    #[test]
    fn loads_and_resolves_root() {
        let m = manifest(
            r#"{"root": "proj", "files": [{"path": "a.c", "language": "c"},
                {"path": "lib/b.cpp", "language": "cpp"}],
                "build_command": ["make"], "variant_output_glob": "build/app",
                "exclude": ["lib/*"], "selection_override": {"a.c": 2}}"#,
        )
        .unwrap();
        assert!(m.root.ends_with("proj") && m.root.is_absolute());
        assert_eq!(m.files[1].language, Language::Cpp);
        assert!(m.is_excluded(Path::new("lib/b.cpp")));
        assert!(!m.is_excluded(Path::new("a.c")));
        assert_eq!(display_path(Path::new("lib/b.cpp")), "lib/b.cpp");
    }

    #[test]
    fn rejects_bad_manifests() {
        let cases = [
            r#"{"root": ".", "files": [], "build_command": ["make"], "variant_output_glob": "a"}"#,
            r#"{"root": ".", "files": [{"path": "a.c", "language": "c"}], "build_command": [], "variant_output_glob": "a"}"#,
            r#"{"root": ".", "files": [{"path": "a.c", "language": "rust"}], "build_command": ["make"], "variant_output_glob": "a"}"#,
            r#"{"root": ".", "files": [{"path": "a.c", "language": "c"}], "build_command": ["make"], "variant_output_glob": "a", "selection_override": {"b.c": 1}}"#,
            r#"{"root": ".", "files": [{"path": "a.c", "language": "c"}], "build_command": ["make"], "variant_output_glob": "a", "build_ok_pattern": "("}"#,
            r#"{"root": ".", "files": [{"path": "../a.c", "language": "c"}], "build_command": ["make"], "variant_output_glob": "a"}"#,
            r#"{"root": ".", "files": [{"path": "a.c", "language": "c"}], "build_command": ["make"], "variant_output_glob": "a", "extra": 1}"#,
        ];
        for json in cases {
            assert!(matches!(manifest(json), Err(OrchestratorError::Manifest(_))), "{json}");
        }
    }
}
