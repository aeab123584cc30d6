use std::collections::{HashMap, HashSet};
use std::path::Path;

use chrono::Utc;

use super::build::{collect_artifacts, run_build};
use super::manifest::{display_path, ProjectManifest};
use super::plan::{ModificationPlan, PlannedFile};
use super::record::{
    append_record, hours_between, read_records, CompileStatus, GenerationSummary, MergeStatus,
    Timing, VariantRecord,
};
use super::workspace::{write_file, Checkpoint, Workspace};
use crate::diff::line_diff;
use crate::error::OrchestratorError;
use crate::extractor::{parse_file, parse_text, FileContext, Language, SourceFile};
use crate::gateway::{transform_function, GenerationConfig, GenerationOutcome, Transport};
use crate::merger::{merge, TransformedFunction};
use crate::prompt::gen_prompt;
use crate::strategies::{Strategy, StrategyCatalog};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub generation: GenerationConfig,
    /// Stop each file after this many prefixes.
    pub prefix_cap: Option<usize>,
    pub context_window: Option<usize>,
    /// Operator-entered hours for a resumed fix, instead of wall-clock time.
    pub man_hours_override: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    Completed(Vec<VariantRecord>),
    /// Halted on a failed build; `resume` continues after the human fix.
    AwaitingHuman {
        checkpoint: Box<Checkpoint>,
        records: Vec<VariantRecord>,
    },
}

impl RunOutcome {
    pub fn records(&self) -> &[VariantRecord] {
        match self {
            RunOutcome::Completed(r) | RunOutcome::AwaitingHuman { records: r, .. } => r,
        }
    }
}

struct Run<'a, T> {
    ws: &'a Workspace,
    manifest: &'a ProjectManifest,
    strategy: &'a Strategy,
    opts: &'a RunOptions,
    transport: &'a mut T,
    records: Vec<VariantRecord>,
}

/// Transforms, merges and builds every planned prefix for one strategy,
/// skipping prefixes already compiled in this workspace.
pub fn synthesize<T: Transport>(
    ws: &Workspace,
    manifest: &ProjectManifest,
    plan: &ModificationPlan,
    strategy: &Strategy,
    opts: &RunOptions,
    transport: &mut T,
) -> Result<RunOutcome, OrchestratorError> {
    let _lock = ws.lock()?;
    if ws.read_checkpoint()?.is_some() {
        return Err(OrchestratorError::CheckpointPending(ws.checkpoint_path()));
    }
    let mut run = Run {
        ws,
        manifest,
        strategy,
        opts,
        transport,
        records: Vec::new(),
    };
    run.steps(plan)
}

/// Rebuilds the human-edited shadow tree named by the checkpoint; on success
/// records the fix and continues the strategy's remaining prefixes.
pub fn resume<T: Transport>(
    ws: &Workspace,
    manifest: &ProjectManifest,
    plan: &ModificationPlan,
    catalog: &StrategyCatalog,
    opts: &RunOptions,
    transport: &mut T,
) -> Result<RunOutcome, OrchestratorError> {
    let _lock = ws.lock()?;
    let cp = ws
        .read_checkpoint()?
        .ok_or_else(|| OrchestratorError::WorkspaceDirty(ws.root().to_path_buf()))?;
    let strategy = catalog.get(&cp.strategy)?;
    let shadow = ws.shadow_root(&strategy.key);
    let log_dir = ws.step_dir("logs", &strategy.key, &cp.file, cp.prefix_t);
    let build = run_build(
        &manifest.build_command,
        &shadow,
        manifest.build_ok_pattern.as_deref(),
        &log_dir,
    )?;
    let artifacts = if build.success {
        let dest = ws.step_dir("variants", &strategy.key, &cp.file, cp.prefix_t);
        collect_artifacts(&shadow, &manifest.variant_output_glob, &dest)?
    } else {
        Vec::new()
    };
    if artifacts.is_empty() {
        log::warn!("build still failing for {} prefix {}", cp.file, cp.prefix_t);
        return Ok(RunOutcome::AwaitingHuman {
            checkpoint: Box::new(cp),
            records: Vec::new(),
        });
    }

    let language = language_of(manifest, &cp.file)?;
    let llm = std::fs::read(&cp.llm_merged_path).map_err(OrchestratorError::io(&cp.llm_merged_path))?;
    let fixed_path = shadow.join(&cp.file);
    let fixed = std::fs::read(&fixed_path).map_err(OrchestratorError::io(&fixed_path))?;
    let mut names = cp.helpers.clone();
    names.push(cp.function.clone());
    let edit_lines = line_diff(
        &region_text(&llm, language, &names)?,
        &region_text(&fixed, language, &names)?,
    )
    .total();

    let finished_at = Utc::now();
    let man_hours = match opts.man_hours_override {
        Some(h) if h >= 0.0 => h,
        Some(_) => return Err(OrchestratorError::NegativeDuration),
        None => hours_between(cp.created_at, finished_at)?,
    };
    let record = VariantRecord {
        strategy: strategy.key.clone(),
        file: cp.file.clone(),
        prefix_t: cp.prefix_t,
        function: cp.function.clone(),
        helpers: cp.helpers.clone(),
        generation: cp.generation.clone(),
        merge_status: cp.merge_status.clone(),
        compile_status: CompileStatus::OkAfterHumanFix,
        artifact_path: Some(relative_to(ws.root(), &artifacts[0])),
        edit_lines,
        man_hours,
        timing: Timing {
            started_at: cp.started_at,
            finished_at,
            generation_elapsed_s: cp.generation_elapsed_s,
        },
    };
    append_record(&ws.records_path(), &record)?;
    ws.clear_checkpoint()?;

    let mut run = Run {
        ws,
        manifest,
        strategy: &strategy,
        opts,
        transport,
        records: vec![record],
    };
    run.steps(plan)
}

impl<T: Transport> Run<'_, T> {
    fn steps(&mut self, plan: &ModificationPlan) -> Result<RunOutcome, OrchestratorError> {
        let key = &self.strategy.key;
        let shadow = self.ws.ensure_shadow(key, &self.manifest.root)?;
        let done: HashSet<(String, usize)> = read_records(&self.ws.records_path())?
            .into_iter()
            .filter(|r| &r.strategy == key && r.compile_status.compiled())
            .map(|r| (r.file, r.prefix_t))
            .collect();

        let mut pristine: HashMap<&Path, FileContext> = HashMap::new();
        for pf in &plan.files {
            let cap = self.opts.prefix_cap.unwrap_or(usize::MAX);
            let file = display_path(&pf.path);
            for &t in pf.ordinals.iter().filter(|&&t| t <= cap) {
                if done.contains(&(file.clone(), t)) {
                    continue;
                }
                if !pristine.contains_key(pf.path.as_path()) {
                    let src = SourceFile::read(self.manifest.source_path(&pf.path), pf.language)?;
                    pristine.insert(&pf.path, parse_file(&src)?);
                }
                let ctx = &pristine[pf.path.as_path()];
                if let Some(cp) = self.step(pf, &file, t, ctx, &shadow)? {
                    return Ok(RunOutcome::AwaitingHuman {
                        checkpoint: Box::new(cp),
                        records: std::mem::take(&mut self.records),
                    });
                }
            }
        }
        Ok(RunOutcome::Completed(std::mem::take(&mut self.records)))
    }

    /// One prefix: transform function `t`, merge into the shadow copy, build.
    /// Returns the checkpoint when the build fails.
    fn step(
        &mut self,
        pf: &PlannedFile,
        file: &str,
        t: usize,
        pristine: &FileContext,
        shadow: &Path,
    ) -> Result<Option<Checkpoint>, OrchestratorError> {
        let key = &self.strategy.key;
        let started_at = Utc::now();
        let target = pristine.function_by_ordinal(t).ok_or_else(|| {
            OrchestratorError::Manifest(format!("{file} has no function #{t}"))
        })?;
        log::info!("[{key}] {file} t={t}: {}", target.name);

        let bundle = gen_prompt(self.strategy, &[target], pristine, self.opts.context_window)?;
        write_file(&self.ws.prompt_path(file, key, t), bundle.render().as_bytes())?;
        let gen = transform_function(&bundle, &self.opts.generation, target, self.transport)?;

        let shadow_file = shadow.join(&pf.path);
        let current = parse_file(&SourceFile::read(&shadow_file, pf.language)?)?;
        let (merge_status, helpers) = match (&gen.outcome, &gen.code_text) {
            (GenerationOutcome::Ok, Some(code)) => {
                match splice(&current, &target.name, code) {
                    Ok((bytes, tf)) => {
                        write_file(&shadow_file, &bytes)?;
                        let status = if tf.is_unchanged() {
                            MergeStatus::Unchanged
                        } else {
                            MergeStatus::Merged
                        };
                        (status, tf.helper_functions.iter().map(|h| h.name.clone()).collect())
                    }
                    Err(reason) => {
                        log::warn!("merge of {} reverted: {reason}", target.name);
                        (MergeStatus::Reverted { reason }, Vec::new())
                    }
                }
            }
            _ => (MergeStatus::Unchanged, Vec::new()),
        };

        let merged_copy = self
            .ws
            .step_dir("merged", key, file, t)
            .join(pf.path.file_name().expect("source path names a file"));
        std::fs::create_dir_all(merged_copy.parent().unwrap())
            .map_err(OrchestratorError::io(&merged_copy))?;
        std::fs::copy(&shadow_file, &merged_copy).map_err(OrchestratorError::io(&merged_copy))?;

        let build = run_build(
            &self.manifest.build_command,
            shadow,
            self.manifest.build_ok_pattern.as_deref(),
            &self.ws.step_dir("logs", key, file, t),
        )?;
        let artifacts = if build.success {
            let dest = self.ws.step_dir("variants", key, file, t);
            collect_artifacts(shadow, &self.manifest.variant_output_glob, &dest)?
        } else {
            Vec::new()
        };
        if build.success && artifacts.is_empty() {
            log::warn!("build succeeded but `{}` matched nothing", self.manifest.variant_output_glob);
        }

        let compiled = !artifacts.is_empty();
        let record = VariantRecord {
            strategy: key.clone(),
            file: file.to_string(),
            prefix_t: t,
            function: target.name.clone(),
            helpers: helpers.clone(),
            generation: GenerationSummary::from(&gen),
            merge_status: merge_status.clone(),
            compile_status: if compiled {
                CompileStatus::Ok
            } else {
                CompileStatus::FailedAwaitingHuman
            },
            artifact_path: artifacts.first().map(|a| relative_to(self.ws.root(), a)),
            edit_lines: 0,
            man_hours: 0.0,
            timing: Timing {
                started_at,
                finished_at: Utc::now(),
                generation_elapsed_s: gen.elapsed_s,
            },
        };
        append_record(&self.ws.records_path(), &record)?;
        self.records.push(record);
        if compiled {
            return Ok(None);
        }

        let cp = Checkpoint {
            file: file.to_string(),
            prefix_t: t,
            strategy: key.clone(),
            build_stdout_path: build.stdout_path,
            build_stderr_path: build.stderr_path,
            created_at: Utc::now(),
            function: target.name.clone(),
            helpers,
            llm_merged_path: merged_copy,
            generation: GenerationSummary::from(&gen),
            merge_status,
            started_at,
            generation_elapsed_s: gen.elapsed_s,
        };
        self.ws.write_checkpoint(&cp)?;
        Ok(Some(cp))
    }
}

/// Merges generated code for `name` into `ctx`; errors come back as text
/// because a failed merge reverts rather than aborting the run.
fn splice(
    ctx: &FileContext,
    name: &str,
    code: &str,
) -> Result<(Vec<u8>, TransformedFunction), String> {
    let target = ctx
        .function(name)
        .ok_or_else(|| format!("target function `{name}` not found in file"))?;
    let tf = TransformedFunction::from_generated(ctx, target, code).map_err(|e| e.to_string())?;
    let merged = merge(ctx, std::slice::from_ref(&tf)).map_err(|e| e.to_string())?;
    Ok((merged.to_bytes(), tf))
}

/// The named functions' definitions in order, missing ones as empty text.
fn region_text(bytes: &[u8], language: Language, names: &[String]) -> Result<String, OrchestratorError> {
    let src = SourceFile::from_bytes("region", language, bytes);
    let ctx = parse_text(&src.text, language)?;
    Ok(names
        .iter()
        .map(|n| ctx.function(n).map_or("", |f| f.body_text.as_str()))
        .collect::<Vec<_>>()
        .join("\n"))
}

fn language_of(manifest: &ProjectManifest, file: &str) -> Result<Language, OrchestratorError> {
    manifest
        .files
        .iter()
        .find(|f| display_path(&f.path) == file)
        .map(|f| f.language)
        .ok_or_else(|| OrchestratorError::Manifest(format!("checkpoint names unknown file {file}")))
}

fn relative_to(root: &Path, path: &Path) -> String {
    display_path(path.strip_prefix(root).unwrap_or(path))
}
