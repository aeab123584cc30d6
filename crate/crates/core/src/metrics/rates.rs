use std::collections::HashMap;

use super::{DetectorReport, Verdict};
use crate::error::MetricsError;

/// Mean over runs of `100 * flagged / total`. Runs may use different detector sets.
pub fn detector_rate(reports: &[DetectorReport]) -> Result<f64, MetricsError> {
    if reports.is_empty() {
        return Err(MetricsError::NoReports);
    }
    let mut sum = 0.0;
    for r in reports {
        if r.detectors_total == 0 {
            return Err(MetricsError::ZeroDetectors(r.variant_id.clone()));
        }
        if r.detectors_flagged > r.detectors_total {
            return Err(MetricsError::InvalidReport {
                variant: r.variant_id.clone(),
                flagged: r.detectors_flagged,
                total: r.detectors_total,
            });
        }
        sum += 100.0 * f64::from(r.detectors_flagged) / f64::from(r.detectors_total);
    }
    Ok(sum / reports.len() as f64)
}

/// Percentage of `variants` whose verdict is benign.
pub fn asr<S: AsRef<str>>(
    variants: &[S],
    verdicts: &HashMap<String, Verdict>,
) -> Result<f64, MetricsError> {
    if variants.is_empty() {
        return Err(MetricsError::EmptyVariantSet);
    }
    let mut benign = 0usize;
    for v in variants {
        match verdicts.get(v.as_ref()) {
            Some(Verdict::Benign) => benign += 1,
            Some(Verdict::Malicious) => {}
            None => return Err(MetricsError::MissingVerdict(v.as_ref().to_string())),
        }
    }
    Ok(100.0 * benign as f64 / variants.len() as f64)
}
