use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("parser produced no tree for {0}")]
    ParseFailure(PathBuf),
    #[error("unsupported language `{0}` (expected c or cpp)")]
    UnsupportedLanguage(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("custom strategy `{0}` shadows a built-in strategy")]
    ShadowsBuiltin(String),
    #[error("invalid strategy config: {0}")]
    Config(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("no target functions supplied")]
    EmptyTargets,
    #[error("target `{0}` does not belong to the file context")]
    ForeignTarget(String),
    #[error("prompt needs ~{estimate} tokens but the model window is {window}")]
    ContextOverflow { estimate: usize, window: usize },
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("invalid generation config: {0}")]
    Config(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MergeError {
    #[error("target function `{0}` not found in file")]
    TargetNotFound(String),
    #[error("replacement for `{expected}` defines {found:?} instead")]
    NameMismatch { expected: String, found: Vec<String> },
    #[error("generated code for `{target}` collides with existing global symbol `{symbol}`")]
    HelperCollision { target: String, symbol: String },
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("detector report for `{0}` has zero detectors")]
    ZeroDetectors(String),
    #[error("no detector reports supplied")]
    NoReports,
    #[error("detector report for `{variant}` flags {flagged} of {total} detectors")]
    InvalidReport {
        variant: String,
        flagged: u32,
        total: u32,
    },
    #[error("variant set is empty")]
    EmptyVariantSet,
    #[error("variant `{0}` has no verdict")]
    MissingVerdict(String),
    #[error("baseline call trace is empty")]
    EmptyBaselineTrace,
    #[error("preservation threshold {0} outside (0, 1]")]
    InvalidDelta(f64),
    #[error("malformed input {path}:{line}: {message}")]
    Input {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("build tool `{0}` not found")]
    BuildToolMissing(String),
    #[error("no checkpoint in workspace {0}; nothing to resume")]
    WorkspaceDirty(PathBuf),
    #[error("workspace {0} has a pending checkpoint; run `resume` first")]
    CheckpointPending(PathBuf),
    #[error("workspace {0} is locked by another run")]
    WorkspaceLocked(PathBuf),
    #[error("end time precedes start time")]
    NegativeDuration,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

impl OrchestratorError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>) -> impl FnOnce(serde_json::Error) -> Self {
        let path = path.into();
        move |source| Self::Json { path, source }
    }
}

/// Stable machine-readable error names, used for JSON diagnostics.
pub trait ErrorKind {
    fn kind(&self) -> &'static str;
}

impl ErrorKind for ExtractError {
    fn kind(&self) -> &'static str {
        match self {
            Self::ParseFailure(_) => "ParseFailure",
            Self::UnsupportedLanguage(_) => "UnsupportedLanguage",
            Self::Io { .. } => "Io",
        }
    }
}

impl ErrorKind for StrategyError {
    fn kind(&self) -> &'static str {
        match self {
            Self::UnknownStrategy(_) => "UnknownStrategy",
            Self::ShadowsBuiltin(_) | Self::Config(_) => "ConfigError",
        }
    }
}

impl ErrorKind for PromptError {
    fn kind(&self) -> &'static str {
        match self {
            Self::EmptyTargets => "EmptyTargets",
            Self::ForeignTarget(_) => "ForeignTarget",
            Self::ContextOverflow { .. } => "ContextOverflow",
        }
    }
}

impl ErrorKind for GatewayError {
    fn kind(&self) -> &'static str {
        match self {
            Self::Transport { .. } => "TransportError",
            Self::Config(_) => "ConfigError",
        }
    }
}

impl ErrorKind for MergeError {
    fn kind(&self) -> &'static str {
        match self {
            Self::TargetNotFound(_) => "TargetNotFound",
            Self::NameMismatch { .. } => "NameMismatch",
            Self::HelperCollision { .. } => "HelperCollision",
        }
    }
}

impl ErrorKind for MetricsError {
    fn kind(&self) -> &'static str {
        match self {
            Self::ZeroDetectors(_) => "ZeroDetectors",
            Self::NoReports => "NoReports",
            Self::InvalidReport { .. } => "InvalidReport",
            Self::EmptyVariantSet => "EmptyVariantSet",
            Self::MissingVerdict(_) => "MissingVerdict",
            Self::EmptyBaselineTrace => "EmptyBaselineTrace",
            Self::InvalidDelta(_) => "InvalidDelta",
            Self::Input { .. } => "InputError",
            Self::Io { .. } => "Io",
        }
    }
}

impl ErrorKind for OrchestratorError {
    fn kind(&self) -> &'static str {
        match self {
            Self::Manifest(_) => "ManifestError",
            Self::BuildToolMissing(_) => "BuildToolMissing",
            Self::WorkspaceDirty(_) => "WorkspaceDirty",
            Self::CheckpointPending(_) => "CheckpointPending",
            Self::WorkspaceLocked(_) => "WorkspaceLocked",
            Self::NegativeDuration => "NegativeDuration",
            Self::Io { .. } => "Io",
            Self::Json { .. } => "JsonError",
            Self::Extract(e) => e.kind(),
            Self::Strategy(e) => e.kind(),
            Self::Prompt(e) => e.kind(),
            Self::Gateway(e) => e.kind(),
        }
    }
}
