//! Runs the transform → merge → build loop over a project and keeps the
//! durable state (shadow trees, checkpoints, records) in a workspace.

mod build;
mod manifest;
mod plan;
mod record;
mod synth;
mod workspace;

pub use build::{collect_artifacts, run_build, BuildOutcome};
pub use manifest::{display_path, ManifestFile, ProjectManifest};
pub use plan::{plan, select_functions, ModificationPlan, PlanDerivation, PlannedFile};
pub use record::{
    append_record, hours_between, latest_records, read_records, CompileStatus, GenerationSummary,
    MergeStatus, Timing, VariantRecord,
};
pub use synth::{resume, synthesize, RunOptions, RunOutcome};
pub use workspace::{tree_hash, Checkpoint, Workspace, WorkspaceLock};

#[cfg(test)]
pub(crate) use record::sample_record;
