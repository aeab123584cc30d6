use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use super::{CallTrace, DetectorReport, Verdict};
use crate::error::MetricsError;

#[derive(Debug, Deserialize)]
struct TraceLine {
    seq: i64,
    call: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct VerdictLine {
    pub variant_id: String,
    pub verdict: Verdict,
}

fn read(path: &Path) -> Result<String, MetricsError> {
    std::fs::read_to_string(path).map_err(|source| MetricsError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn json_lines<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, MetricsError> {
    read(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| MetricsError::Input {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Reads a call trace: JSON Lines `{seq, call}` (ordered by `seq`) or plain
/// text with one call per line.
pub fn read_trace(path: &Path) -> Result<CallTrace, MetricsError> {
    let program_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let text = read(path)?;
    let is_json = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| l.trim_start().starts_with('{'));
    if !is_json {
        return Ok(CallTrace::new(program_id, text.lines()));
    }
    let mut lines: Vec<TraceLine> = json_lines(path)?;
    if let Some(i) = lines.iter().position(|l| l.call.trim().is_empty()) {
        return Err(MetricsError::Input {
            path: path.to_path_buf(),
            line: i + 1,
            message: "empty call identifier".into(),
        });
    }
    lines.sort_by_key(|l| l.seq);
    Ok(CallTrace::new(program_id, lines.into_iter().map(|l| l.call)))
}

/// JSON Lines of [`DetectorReport`].
pub fn read_detector_reports(path: &Path) -> Result<Vec<DetectorReport>, MetricsError> {
    json_lines(path)
}

/// JSON Lines `{variant_id, verdict: "benign"|"malicious"}`; later lines win.
pub fn read_verdicts(path: &Path) -> Result<HashMap<String, Verdict>, MetricsError> {
    Ok(json_lines::<VerdictLine>(path)?
        .into_iter()
        .map(|v| (v.variant_id, v.verdict))
        .collect())
}
