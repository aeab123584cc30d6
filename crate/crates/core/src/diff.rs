//! Line-level edit counting.

use similar::{capture_diff_slices, Algorithm, DiffOp};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LineDiffStats {
    pub added: usize,
    pub removed: usize,
}

impl LineDiffStats {
    /// Additions plus deletions; a changed line counts twice.
    pub fn total(self) -> usize {
        self.added + self.removed
    }
}

/// Counts lines added and removed by a minimal line diff from `old` to `new`.
///
/// Line terminators are not part of the comparison, so a missing final
/// newline is not an edit.
pub fn line_diff(old: &str, new: &str) -> LineDiffStats {
    let old: Vec<&str> = old.lines().collect();
    let new: Vec<&str> = new.lines().collect();
    capture_diff_slices(Algorithm::Myers, &old, &new)
        .iter()
        .fold(LineDiffStats::default(), |mut acc, op| {
            match *op {
                DiffOp::Equal { .. } => {}
                DiffOp::Delete { old_len, .. } => acc.removed += old_len,
                DiffOp::Insert { new_len, .. } => acc.added += new_len,
                DiffOp::Replace { old_len, new_len, .. } => {
                    acc.removed += old_len;
                    acc.added += new_len;
                }
            }
            acc
        })
}
