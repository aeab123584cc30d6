use super::CallTrace;
use crate::error::MetricsError;

/// Longest common subsequence length; O(|a|·|b|) time, two rows of memory.
pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (outer, inner) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut prev = vec![0usize; inner.len() + 1];
    let mut curr = vec![0usize; inner.len() + 1];
    for x in outer {
        for (j, y) in inner.iter().enumerate() {
            curr[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[inner.len()]
}

/// `lcs(baseline, variant) / |baseline|`; 1.0 exactly when the baseline
/// order survives in the variant, extra calls allowed.
pub fn normalized_lcs(baseline: &CallTrace, variant: &CallTrace) -> Result<f64, MetricsError> {
    if baseline.is_empty() {
        return Err(MetricsError::EmptyBaselineTrace);
    }
    Ok(lcs_length(&baseline.calls, &variant.calls) as f64 / baseline.len() as f64)
}
