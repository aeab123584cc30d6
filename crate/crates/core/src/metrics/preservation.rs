use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreservationConfig {
    delta: f64,
}

impl PreservationConfig {
    pub const DEFAULT_DELTA: f64 = 0.96;

    pub fn new(delta: f64) -> Result<Self, MetricsError> {
        if delta > 0.0 && delta <= 1.0 {
            Ok(Self { delta })
        } else {
            Err(MetricsError::InvalidDelta(delta))
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl Default for PreservationConfig {
    fn default() -> Self {
        Self {
            delta: Self::DEFAULT_DELTA,
        }
    }
}

/// Percentage, or `Undefined` when no variant beat the baseline rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PreservationRate {
    Defined(f64),
    Undefined,
}

impl PreservationRate {
    pub fn value(self) -> Option<f64> {
        match self {
            PreservationRate::Defined(v) => Some(v),
            PreservationRate::Undefined => None,
        }
    }
}

impl fmt::Display for PreservationRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreservationRate::Defined(v) => write!(f, "{v:.3}"),
            PreservationRate::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for PreservationRate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PreservationRate::Defined(v) => s.serialize_f64(*v),
            PreservationRate::Undefined => s.serialize_str("undefined"),
        }
    }
}

/// Among variants whose detector rate is below `baseline_rate`, the
/// percentage whose normalized LCS reaches the threshold.
///
/// `variants` holds `(detector_rate, normalized_lcs)` pairs.
pub fn preservation_rate(
    baseline_rate: f64,
    variants: &[(f64, f64)],
    cfg: &PreservationConfig,
) -> PreservationRate {
    let below: Vec<f64> = variants
        .iter()
        .filter(|(rate, _)| *rate < baseline_rate)
        .map(|(_, nlcs)| *nlcs)
        .collect();
    if below.is_empty() {
        return PreservationRate::Undefined;
    }
    let passing = below.iter().filter(|nlcs| **nlcs >= cfg.delta).count();
    PreservationRate::Defined(100.0 * passing as f64 / below.len() as f64)
}
