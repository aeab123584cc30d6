//! LLM-guided, function-level source transformation for C and C++ projects.
//!
//! The pipeline extracts free functions from a file, builds a transformation
//! prompt per function, sends it to a chat-completion endpoint, splices the
//! returned code back into a shadow copy of the project, builds it, and
//! records per-variant bookkeeping. The [`metrics`] module scores the
//! resulting variants.

pub mod config;
pub mod diff;
pub mod error;
pub mod extractor;
pub mod gateway;
pub mod merger;
pub mod metrics;
pub mod orchestrator;
pub mod prompt;
pub mod strategies;

pub use error::{
    ErrorKind, ExtractError, GatewayError, MergeError, MetricsError, OrchestratorError,
    PromptError, StrategyError,
};
pub use extractor::{
    parse_file, parse_text, reconstruct, reconstruct_bytes, Enclosing, FileContext, FunctionDef,
    Language, SourceFile, TopLevelItem,
};
pub use gateway::{
    parse_response, transform_function, GenerationConfig, GenerationOutcome, GenerationResult,
    HttpTransport, ReplayTransport, ResponseDiagnosis, ScriptedTransport, Transport,
};
pub use merger::{extract_new_headers, merge, MergedFile, Provenance, TransformedFunction};
pub use metrics::{CallTrace, DetectorReport, PreservationConfig, PreservationRate, Verdict};
pub use orchestrator::{
    CompileStatus, ModificationPlan, ProjectManifest, RunOptions, RunOutcome, VariantRecord,
    Workspace,
};
pub use prompt::{estimate_tokens, gen_prompt, PromptBundle};
pub use strategies::{Strategy, StrategyCatalog, StrategyId, StrategyKey};
