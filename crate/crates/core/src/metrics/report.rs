use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::Serialize;

use super::io::read_trace;
use super::{
    asr, detector_rate, edit_workload, man_hours_total, normalized_lcs, preservation_rate,
    CallTrace, DetectorReport, PreservationConfig, PreservationRate, Verdict,
};
use crate::error::MetricsError;
use crate::orchestrator::{latest_records, VariantRecord};

/// Variant id under which the unmodified program's reports and trace are filed.
pub const BASELINE_VARIANT_ID: &str = "baseline";

/// User-supplied measurements, keyed by variant id (`strategy/file/t`).
#[derive(Debug, Clone, Default)]
pub struct EvaluationInputs {
    pub reports: Vec<DetectorReport>,
    pub verdicts: HashMap<String, Verdict>,
    pub traces: HashMap<String, CallTrace>,
    pub baseline_trace: Option<CallTrace>,
    /// Overrides the rate computed from `baseline` reports.
    pub baseline_rate: Option<f64>,
    pub preservation: PreservationConfig,
}

impl EvaluationInputs {
    /// Loads `<dir>/<variant_id>.{jsonl,txt}` for each id that has one, plus
    /// `<dir>/baseline.{jsonl,txt}`.
    pub fn load_traces<'a, I>(&mut self, dir: &Path, variant_ids: I) -> Result<(), MetricsError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let find = |id: &str| {
            ["jsonl", "txt"]
                .iter()
                .map(|ext| dir.join(format!("{id}.{ext}")))
                .find(|p| p.is_file())
        };
        if let Some(p) = find(BASELINE_VARIANT_ID) {
            self.baseline_trace = Some(read_trace(&p)?);
        }
        for id in variant_ids {
            if let Some(p) = find(id) {
                self.traces.insert(id.to_string(), read_trace(&p)?);
            }
        }
        Ok(())
    }

    fn reports_for(&self, id: &str) -> Vec<DetectorReport> {
        self.reports.iter().filter(|r| r.variant_id == id).cloned().collect()
    }

    pub fn resolved_baseline_rate(&self) -> Result<Option<f64>, MetricsError> {
        if let Some(r) = self.baseline_rate {
            return Ok(Some(r));
        }
        let runs = self.reports_for(BASELINE_VARIANT_ID);
        if runs.is_empty() {
            Ok(None)
        } else {
            detector_rate(&runs).map(Some)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantEvaluation {
    pub variant_id: String,
    pub strategy: String,
    pub detector_rate: Option<f64>,
    pub normalized_lcs: Option<f64>,
    pub verdict: Option<Verdict>,
}

/// Per-variant measurements for every compiled record (latest per variant).
pub fn evaluate(
    records: &[VariantRecord],
    inputs: &EvaluationInputs,
) -> Result<Vec<VariantEvaluation>, MetricsError> {
    latest_records(records)
        .iter()
        .filter(|r| r.compile_status.compiled())
        .map(|r| {
            let id = r.variant_id();
            let runs = inputs.reports_for(&id);
            let rate = if runs.is_empty() { None } else { Some(detector_rate(&runs)?) };
            let nlcs = match (&inputs.baseline_trace, inputs.traces.get(&id)) {
                (Some(base), Some(trace)) => Some(normalized_lcs(base, trace)?),
                _ => None,
            };
            Ok(VariantEvaluation {
                verdict: inputs.verdicts.get(&id).copied(),
                variant_id: id,
                strategy: r.strategy.to_string(),
                detector_rate: rate,
                normalized_lcs: nlcs,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategySummary {
    #[serde(rename = "W")]
    pub w: usize,
    #[serde(rename = "H")]
    pub h: f64,
    pub variants: usize,
    pub mean_rate: Option<f64>,
    pub asr: Option<f64>,
    pub phi: Option<PreservationRate>,
}

/// Per-strategy W, H, mean detector rate, ASR and preservation rate.
/// Measures without inputs come out as `None`.
pub fn summarize(
    records: &[VariantRecord],
    inputs: &EvaluationInputs,
) -> Result<BTreeMap<String, StrategySummary>, MetricsError> {
    let latest = latest_records(records);
    let evaluations = evaluate(&latest, inputs)?;
    let baseline_rate = inputs.resolved_baseline_rate()?;

    let mut groups: BTreeMap<String, Vec<&VariantRecord>> = BTreeMap::new();
    for r in &latest {
        groups.entry(r.strategy.to_string()).or_default().push(r);
    }
    let mut out = BTreeMap::new();
    for (strategy, recs) in groups {
        let evals: Vec<&VariantEvaluation> =
            evaluations.iter().filter(|e| e.strategy == strategy).collect();
        let rates: Vec<f64> = evals.iter().filter_map(|e| e.detector_rate).collect();
        let mean_rate = (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64);
        let ids: Vec<&str> = evals.iter().map(|e| e.variant_id.as_str()).collect();
        let asr = if evals.iter().any(|e| e.verdict.is_some()) {
            Some(asr(&ids, &inputs.verdicts)?)
        } else {
            None
        };
        let phi = match (baseline_rate, &inputs.baseline_trace) {
            (Some(base), Some(_)) => {
                let pairs: Vec<(f64, f64)> = evals
                    .iter()
                    .filter_map(|e| Some((e.detector_rate?, e.normalized_lcs?)))
                    .collect();
                Some(preservation_rate(base, &pairs, &inputs.preservation))
            }
            _ => None,
        };
        out.insert(
            strategy,
            StrategySummary {
                w: edit_workload(recs.iter().copied()),
                h: man_hours_total(recs.iter().copied()),
                variants: evals.len(),
                mean_rate,
                asr,
                phi,
            },
        );
    }
    Ok(out)
}

pub fn write_summary_csv<W: std::io::Write>(
    summary: &BTreeMap<String, StrategySummary>,
    out: W,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["strategy", "W", "H", "variants", "mean_rate", "asr", "phi"])?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for (strategy, s) in summary {
        w.write_record([
            strategy.clone(),
            s.w.to_string(),
            s.h.to_string(),
            s.variants.to_string(),
            opt(s.mean_rate),
            opt(s.asr),
            s.phi.map(|p| p.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
