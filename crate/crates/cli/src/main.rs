use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use codemorph::config::Config;
use codemorph::gateway::RecordingTransport;
use codemorph::metrics::{self, EvaluationInputs};
use codemorph::orchestrator::{self, read_records, RunOutcome};
use codemorph::{
    gen_prompt, parse_file, ErrorKind, FileContext, HttpTransport, PreservationConfig,
    ProjectManifest, ReplayTransport, RunOptions, SourceFile, StrategyCatalog, Transport,
    Workspace,
};

const EXIT_DOMAIN: u8 = 1;
const EXIT_CHECKPOINT: u8 = 3;

#[derive(Parser)]
#[command(name = "codemorph", version, about = "Function-level LLM source transformation for C/C++ projects")]
struct Cli {
    /// TOML file with [generation] settings and [strategies.custom] entries.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Human-readable tables instead of JSON on stdout.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the modification plan (and prompt fingerprints with --strategy).
    Plan {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        strategy: Option<String>,
        /// Shuffle files with equal function counts using this seed.
        #[arg(long, value_name = "SEED")]
        shuffle_ties: Option<u64>,
    },
    /// Generate, merge and build variants for one or more strategies.
    Mutate {
        #[command(flatten)]
        run: RunArgs,
        /// Defaults to the manifest's strategy list.
        #[arg(long)]
        strategy: Vec<String>,
    },
    /// Rebuild after a human fix and continue the halted strategy.
    Resume {
        #[command(flatten)]
        run: RunArgs,
        /// Hours spent on the fix, instead of checkpoint-to-resume wall time.
        #[arg(long)]
        man_hours: Option<f64>,
    },
    /// Per-variant detector rate, trace similarity and verdict as JSON lines.
    Evaluate(MetricArgs),
    /// Per-strategy W, H, mean rate, ASR and preservation rate.
    Report {
        #[command(flatten)]
        metrics: MetricArgs,
        /// Also write the summary as CSV.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    workspace: PathBuf,
    /// Only transform the first N planned functions of each file.
    #[arg(long, value_name = "T")]
    prefix: Option<usize>,
    #[arg(long, conflicts_with = "replay")]
    endpoint: Option<String>,
    /// Serve model replies from recorded transcripts in DIR.
    #[arg(long, value_name = "DIR")]
    replay: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shuffle_ties: Option<u64>,
}

#[derive(Args)]
struct MetricArgs {
    #[arg(long)]
    workspace: PathBuf,
    /// JSON lines {variant_id, run_index, detectors_total, detectors_flagged}.
    #[arg(long)]
    reports: Option<PathBuf>,
    /// JSON lines {variant_id, verdict}.
    #[arg(long)]
    verdicts: Option<PathBuf>,
    /// Directory of <variant_id>.jsonl|.txt traces plus baseline.jsonl|.txt.
    #[arg(long)]
    traces: Option<PathBuf>,
    #[arg(long)]
    baseline_rate: Option<f64>,
    #[arg(long, default_value_t = PreservationConfig::DEFAULT_DELTA)]
    delta: f64,
}

/// Single-line JSON error written to stderr.
#[derive(Debug, Serialize)]
struct Diagnostic {
    error: &'static str,
    message: String,
}

impl<E: ErrorKind + std::fmt::Display> From<E> for Diagnostic {
    fn from(e: E) -> Self {
        Diagnostic {
            error: e.kind(),
            message: e.to_string(),
        }
    }
}

fn io_diag(path: &Path, e: impl std::fmt::Display) -> Diagnostic {
    Diagnostic {
        error: "Io",
        message: format!("{}: {e}", path.display()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(code) => code,
        Err(d) => {
            eprintln!("{}", serde_json::to_string(&d).expect("diagnostic serializes"));
            ExitCode::from(EXIT_DOMAIN)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Diagnostic> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let catalog = config.catalog()?;
    match cli.command {
        Command::Plan {
            manifest,
            strategy,
            shuffle_ties,
        } => cmd_plan(&manifest, strategy.as_deref(), shuffle_ties, &config, &catalog, cli.pretty),
        Command::Mutate { run, strategy } => {
            let manifest = ProjectManifest::load(&run.manifest)?;
            let mut tokens = if strategy.is_empty() { manifest.strategies.clone() } else { strategy };
            tokens.dedup();
            if tokens.is_empty() {
                return Err(Diagnostic {
                    error: "UnknownStrategy",
                    message: "no --strategy given and the manifest lists none".into(),
                });
            }
            let strategies = tokens
                .iter()
                .map(|t| catalog.resolve(t))
                .collect::<Result<Vec<_>, _>>()?;
            let (ws, plan, opts, mut transport) = prepare(&run, &manifest, &config, None)?;
            for s in &strategies {
                let outcome =
                    orchestrator::synthesize(&ws, &manifest, &plan, s, &opts, &mut transport)?;
                if let Some(code) = emit_outcome(&outcome, cli.pretty) {
                    return Ok(code);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Resume { run, man_hours } => {
            let manifest = ProjectManifest::load(&run.manifest)?;
            let (ws, plan, opts, mut transport) = prepare(&run, &manifest, &config, man_hours)?;
            let outcome =
                orchestrator::resume(&ws, &manifest, &plan, &catalog, &opts, &mut transport)?;
            Ok(emit_outcome(&outcome, cli.pretty).unwrap_or(ExitCode::SUCCESS))
        }
        Command::Evaluate(args) => {
            let (records, inputs) = load_metrics(&args)?;
            let evals = metrics::evaluate(&records, &inputs)?;
            for e in &evals {
                if cli.pretty {
                    println!(
                        "{:<40} rate={:<8} nlcs={:<8} verdict={}",
                        e.variant_id,
                        opt(e.detector_rate),
                        opt(e.normalized_lcs),
                        e.verdict.map_or("-".into(), |v| format!("{v:?}").to_lowercase()),
                    );
                } else {
                    println!("{}", serde_json::to_string(e).expect("evaluation serializes"));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { metrics: args, csv } => {
            let (records, inputs) = load_metrics(&args)?;
            let summary = metrics::summarize(&records, &inputs)?;
            if let Some(path) = csv {
                let file = std::fs::File::create(&path).map_err(|e| io_diag(&path, e))?;
                metrics::write_summary_csv(&summary, file).map_err(|e| io_diag(&path, e))?;
            }
            if cli.pretty {
                println!("{:<16} {:>6} {:>8} {:>8} {:>10} {:>8} {:>10}", "strategy", "W", "H", "variants", "mean_rate", "asr", "phi");
                for (name, s) in &summary {
                    println!(
                        "{:<16} {:>6} {:>8.3} {:>8} {:>10} {:>8} {:>10}",
                        name,
                        s.w,
                        s.h,
                        s.variants,
                        opt(s.mean_rate),
                        opt(s.asr),
                        s.phi.map_or("-".into(), |p| p.to_string()),
                    );
                }
            } else {
                println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{v:.3}"))
}

fn parse_all(manifest: &ProjectManifest) -> Result<Vec<FileContext>, Diagnostic> {
    manifest
        .files
        .iter()
        .map(|f| {
            let src = SourceFile::read(manifest.source_path(&f.path), f.language)?;
            Ok(parse_file(&src)?)
        })
        .collect()
}

#[derive(Serialize)]
struct PromptInfo {
    file: String,
    ordinal: usize,
    function: String,
    fingerprint: String,
    token_estimate: usize,
}

fn cmd_plan(
    manifest_path: &Path,
    strategy: Option<&str>,
    shuffle_ties: Option<u64>,
    config: &Config,
    catalog: &StrategyCatalog,
    pretty: bool,
) -> Result<ExitCode, Diagnostic> {
    let manifest = ProjectManifest::load(manifest_path)?;
    let contexts = parse_all(&manifest)?;
    let plan = orchestrator::plan(&manifest, &contexts, shuffle_ties);

    let mut prompts = Vec::new();
    if let Some(token) = strategy {
        let strategy = catalog.resolve(token)?;
        for pf in &plan.files {
            let idx = manifest.files.iter().position(|f| f.path == pf.path).expect("planned file is in manifest");
            let ctx = &contexts[idx];
            for &t in &pf.ordinals {
                let target = ctx.function_by_ordinal(t).expect("ordinal within file");
                let bundle = gen_prompt(&strategy, &[target], ctx, config.context_window)?;
                prompts.push(PromptInfo {
                    file: orchestrator::display_path(&pf.path),
                    ordinal: t,
                    function: target.name.clone(),
                    fingerprint: bundle.fingerprint(),
                    token_estimate: bundle.token_estimate,
                });
            }
        }
    }

    if pretty {
        println!("derivation: {:?}", plan.derivation);
        for pf in &plan.files {
            println!(
                "{:<32} {:>3}/{:<3} {}",
                pf.path.display(),
                pf.ordinals.len(),
                pf.function_count,
                pf.names.join(", ")
            );
        }
        for p in &prompts {
            println!("{}#{} {} {} (~{} tokens)", p.file, p.ordinal, p.function, &p.fingerprint[..16], p.token_estimate);
        }
    } else {
        let mut out = serde_json::to_value(&plan).expect("plan serializes");
        if strategy.is_some() {
            out["prompts"] = serde_json::to_value(&prompts).expect("prompts serialize");
        }
        println!("{out}");
    }
    Ok(ExitCode::SUCCESS)
}

fn prepare(
    run: &RunArgs,
    manifest: &ProjectManifest,
    config: &Config,
    man_hours: Option<f64>,
) -> Result<(Workspace, orchestrator::ModificationPlan, RunOptions, Box<dyn Transport>), Diagnostic> {
    let contexts = parse_all(manifest)?;
    let plan = orchestrator::plan(manifest, &contexts, run.shuffle_ties);
    let ws = Workspace::open(&run.workspace)?;

    let mut generation = config.generation.clone();
    generation.apply_env();
    if let Some(url) = &run.endpoint {
        generation.endpoint_url = url.clone();
    }
    if let Some(seed) = run.seed {
        generation.seed = seed;
    }
    generation.validate()?;

    let transport: Box<dyn Transport> = match &run.replay {
        Some(dir) => Box::new(ReplayTransport::new(dir)),
        None => Box::new(RecordingTransport::new(
            HttpTransport::new(
                generation.endpoint_url.clone(),
                Duration::from_secs_f64(generation.timeout_s),
            ),
            ws.transcripts_dir(),
        )),
    };
    let opts = RunOptions {
        generation,
        prefix_cap: run.prefix,
        context_window: config.context_window,
        man_hours_override: man_hours,
    };
    Ok((ws, plan, opts, transport))
}

/// Prints the records of one run; returns the exit code when it halted.
fn emit_outcome(outcome: &RunOutcome, pretty: bool) -> Option<ExitCode> {
    for r in outcome.records() {
        if pretty {
            println!(
                "{:<40} {:<20?} {:<12?} edit_lines={} man_hours={:.3}",
                r.variant_id(),
                r.compile_status,
                r.generation.outcome,
                r.edit_lines,
                r.man_hours
            );
        } else {
            println!("{}", serde_json::to_string(r).expect("record serializes"));
        }
    }
    match outcome {
        RunOutcome::Completed(_) => None,
        RunOutcome::AwaitingHuman { checkpoint, .. } => {
            let msg = serde_json::json!({
                "status": "awaiting_human",
                "file": checkpoint.file,
                "prefix_t": checkpoint.prefix_t,
                "strategy": checkpoint.strategy,
                "build_stderr_path": checkpoint.build_stderr_path,
            });
            eprintln!("{msg}");
            Some(ExitCode::from(EXIT_CHECKPOINT))
        }
    }
}

fn load_metrics(args: &MetricArgs) -> Result<(Vec<codemorph::VariantRecord>, EvaluationInputs), Diagnostic> {
    let ws = Workspace::open(&args.workspace)?;
    let records = read_records(&ws.records_path())?;
    let mut inputs = EvaluationInputs {
        baseline_rate: args.baseline_rate,
        preservation: PreservationConfig::new(args.delta)?,
        ..Default::default()
    };
    if let Some(p) = &args.reports {
        inputs.reports = metrics::read_detector_reports(p)?;
    }
    if let Some(p) = &args.verdicts {
        inputs.verdicts = metrics::read_verdicts(p)?;
    }
    if let Some(dir) = &args.traces {
        let ids: Vec<String> = records.iter().map(|r| r.variant_id()).collect();
        inputs.load_traces(dir, ids.iter().map(String::as_str))?;
    }
    Ok((records, inputs))
}
