//! Variant scoring: detector rates, ASR, edit workload, man-hours, call-trace
//! LCS similarity and the functionality-preservation rate.

mod io;
mod lcs;
mod preservation;
mod rates;
mod report;
mod workload;

pub use io::{read_detector_reports, read_trace, read_verdicts, VerdictLine};
pub use lcs::{lcs_length, normalized_lcs};
pub use preservation::{preservation_rate, PreservationConfig, PreservationRate};
pub use rates::{asr, detector_rate};
pub use report::{
    evaluate, summarize, write_summary_csv, EvaluationInputs, StrategySummary, VariantEvaluation,
    BASELINE_VARIANT_ID,
};
pub use workload::{edit_workload, man_hours_total};

use serde::{Deserialize, Serialize};

/// One scan of one variant by a set of detectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorReport {
    pub variant_id: String,
    /// 1-based run number.
    pub run_index: u32,
    pub detectors_total: u32,
    pub detectors_flagged: u32,
}

/// Classifier verdict for one variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Benign,
    Malicious,
}

/// Ordered call identifiers observed during one execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallTrace {
    pub program_id: String,
    pub calls: Vec<String>,
}

impl CallTrace {
    /// Builds a trace, trimming identifiers and dropping blank ones.
    pub fn new<I, S>(program_id: impl Into<String>, calls: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            program_id: program_id.into(),
            calls: calls
                .into_iter()
                .map(|c| c.as_ref().trim().to_string())
                .filter(|c| !c.is_empty())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.calls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.calls.is_empty()
    }
}
