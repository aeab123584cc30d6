use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::OrchestratorError;
use crate::gateway::{GenerationOutcome, GenerationResult};
use crate::strategies::StrategyKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompileStatus {
    Ok,
    FailedAwaitingHuman,
    OkAfterHumanFix,
}

impl CompileStatus {
    pub fn compiled(self) -> bool {
        matches!(self, CompileStatus::Ok | CompileStatus::OkAfterHumanFix)
    }
}

/// What happened when splicing the generated code into the file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MergeStatus {
    Merged,
    /// Generation yielded nothing usable; the original definition was kept.
    Unchanged,
    /// The generated code could not be merged and the original was kept.
    Reverted { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub outcome: GenerationOutcome,
    pub attempts: u32,
    pub generated_line_count: usize,
}

impl From<&GenerationResult> for GenerationSummary {
    fn from(r: &GenerationResult) -> Self {
        Self {
            outcome: r.outcome,
            attempts: r.attempts,
            generated_line_count: r.generated_line_count,
        }
    }
}

/// Wall-clock fields; everything else in a record is deterministic under replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub generation_elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRecord {
    pub strategy: StrategyKey,
    /// Path relative to the project root, `/`-separated.
    pub file: String,
    pub prefix_t: usize,
    pub function: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub helpers: Vec<String>,
    pub generation: GenerationSummary,
    pub merge_status: MergeStatus,
    pub compile_status: CompileStatus,
    /// Relative to the workspace.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact_path: Option<String>,
    pub edit_lines: usize,
    pub man_hours: f64,
    pub timing: Timing,
}

impl VariantRecord {
    pub fn variant_id(&self) -> String {
        format!("{}/{}/{}", self.strategy, self.file, self.prefix_t)
    }

    /// Adds the hours between `start` and `end`.
    pub fn record_man_hours(
        &mut self,
        start: DateTime<Utc>,
        end: DateTime<Utc>,
    ) -> Result<(), OrchestratorError> {
        self.man_hours += hours_between(start, end)?;
        Ok(())
    }
}

pub fn hours_between(start: DateTime<Utc>, end: DateTime<Utc>) -> Result<f64, OrchestratorError> {
    let d = end - start;
    if d < chrono::Duration::zero() {
        return Err(OrchestratorError::NegativeDuration);
    }
    let micros = d.num_microseconds().unwrap_or(d.num_milliseconds().saturating_mul(1000));
    Ok(micros as f64 / 3.6e9)
}

pub fn append_record(path: &Path, record: &VariantRecord) -> Result<(), OrchestratorError> {
    let line = serde_json::to_string(record).map_err(OrchestratorError::json(path))?;
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(OrchestratorError::io(path))?;
    writeln!(f, "{line}").map_err(OrchestratorError::io(path))
}

/// All records in file order. A missing file reads as empty.
pub fn read_records(path: &Path) -> Result<Vec<VariantRecord>, OrchestratorError> {
    let f = match std::fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(OrchestratorError::io(path)(e)),
    };
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line.map_err(OrchestratorError::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(OrchestratorError::json(path))?);
    }
    Ok(out)
}

/// Keeps the last record per variant id, in order of first appearance.
pub fn latest_records(records: &[VariantRecord]) -> Vec<VariantRecord> {
    let mut order: Vec<String> = Vec::new();
    let mut latest = std::collections::HashMap::new();
    for r in records {
        let id = r.variant_id();
        if !latest.contains_key(&id) {
            order.push(id.clone());
        }
        latest.insert(id, r.clone());
    }
    order.into_iter().filter_map(|id| latest.remove(&id)).collect()
}

#[cfg(test)]
pub(crate) fn sample_record(strategy: &str, file: &str, t: usize) -> VariantRecord {
    let now = Utc::now();
    VariantRecord {
        strategy: serde_json::from_value(serde_json::Value::String(strategy.into())).unwrap(),
        file: file.into(),
        prefix_t: t,
        function: format!("f{t}"),
        helpers: Vec::new(),
        generation: GenerationSummary {
            outcome: GenerationOutcome::Ok,
            attempts: 1,
            generated_line_count: 3,
        },
        merge_status: MergeStatus::Merged,
        compile_status: CompileStatus::Ok,
        artifact_path: Some(format!("variants/{strategy}/{file}/{t}/app")),
        edit_lines: 0,
        man_hours: 0.0,
        timing: Timing {
            started_at: now,
            finished_at: now,
            generation_elapsed_s: 0.0,
        },
    }
}
