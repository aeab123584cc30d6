use std::path::{Path, PathBuf};
use std::process::Command;

use regex::Regex;

use super::workspace::write_file;
use crate::error::OrchestratorError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildOutcome {
    pub success: bool,
    pub exit_code: Option<i32>,
    pub stdout_path: PathBuf,
    pub stderr_path: PathBuf,
}

/// Runs `argv` in `cwd`, saving output under `log_dir`. Success needs exit 0
/// and, when given, a match of `ok_pattern` on stdout or stderr.
pub fn run_build(
    argv: &[String],
    cwd: &Path,
    ok_pattern: Option<&str>,
    log_dir: &Path,
) -> Result<BuildOutcome, OrchestratorError> {
    let (program, args) = argv
        .split_first()
        .ok_or_else(|| OrchestratorError::Manifest("`build_command` is empty".into()))?;
    log::info!("build: {} (in {})", argv.join(" "), cwd.display());
    let output = Command::new(program)
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => OrchestratorError::BuildToolMissing(program.clone()),
            _ => OrchestratorError::io(cwd)(e),
        })?;

    let stdout_path = log_dir.join("build.stdout.log");
    let stderr_path = log_dir.join("build.stderr.log");
    write_file(&stdout_path, &output.stdout)?;
    write_file(&stderr_path, &output.stderr)?;

    let mut success = output.status.success();
    if success {
        if let Some(p) = ok_pattern {
            let re = Regex::new(p).map_err(|e| OrchestratorError::Manifest(e.to_string()))?;
            success = re.is_match(&String::from_utf8_lossy(&output.stdout))
                || re.is_match(&String::from_utf8_lossy(&output.stderr));
        }
    }
    Ok(BuildOutcome {
        success,
        exit_code: output.status.code(),
        stdout_path,
        stderr_path,
    })
}

/// Copies every file matching `pattern` (relative to `root`) into `dest`,
/// returning the copied paths in match order.
pub fn collect_artifacts(
    root: &Path,
    pattern: &str,
    dest: &Path,
) -> Result<Vec<PathBuf>, OrchestratorError> {
    let full = root.join(pattern);
    let full = full.to_string_lossy();
    let matches = glob::glob(&full).map_err(|e| OrchestratorError::Manifest(e.to_string()))?;
    let mut copied = Vec::new();
    for m in matches {
        let src = m.map_err(|e| OrchestratorError::io(e.path().to_path_buf())(e.into()))?;
        if !src.is_file() {
            continue;
        }
        std::fs::create_dir_all(dest).map_err(OrchestratorError::io(dest))?;
        let target = dest.join(src.file_name().expect("glob match has a file name"));
        std::fs::copy(&src, &target).map_err(OrchestratorError::io(&target))?;
        copied.push(target);
    }
    Ok(copied)
}
