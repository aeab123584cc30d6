//! Chat-completion client with fenced-code extraction and the retry/revert protocol.

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::GatewayError;
use crate::extractor::{FunctionDef, Language};
use crate::prompt::PromptBundle;

pub const ENDPOINT_ENV: &str = "CODEMORPH_ENDPOINT";
pub const MODEL_ENV: &str = "CODEMORPH_MODEL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub endpoint_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub top_k: u32,
    pub top_p: f64,
    pub seed: u64,
    pub max_retries: u32,
    pub timeout_s: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            endpoint_url: "http://localhost:11434/api/chat".to_string(),
            model_name: "codestral:22b".to_string(),
            temperature: 0.8,
            top_k: 40,
            top_p: 0.9,
            seed: 0,
            max_retries: 5,
            timeout_s: 300.0,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        let fail = |msg: &str| Err(GatewayError::Config(msg.to_string()));
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return fail("temperature must be >= 0");
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return fail("top_p must be in (0, 1]");
        }
        if self.top_k < 1 {
            return fail("top_k must be >= 1");
        }
        if self.timeout_s.is_nan() || self.timeout_s <= 0.0 {
            return fail("timeout_s must be > 0");
        }
        if self.model_name.trim().is_empty() {
            return fail("model_name must not be empty");
        }
        Ok(())
    }

    /// Applies `CODEMORPH_ENDPOINT` / `CODEMORPH_MODEL` when set.
    pub fn apply_env(&mut self) {
        if let Ok(url) = std::env::var(ENDPOINT_ENV) {
            if !url.is_empty() {
                self.endpoint_url = url;
            }
        }
        if let Ok(model) = std::env::var(MODEL_ENV) {
            if !model.is_empty() {
                self.model_name = model;
            }
        }
    }

    pub fn request(&self, bundle: &PromptBundle, seed: u64) -> ChatRequest {
        ChatRequest {
            model: self.model_name.clone(),
            messages: vec![
                ChatMessage {
                    role: "system".into(),
                    content: bundle.system_text.clone(),
                },
                ChatMessage {
                    role: "user".into(),
                    content: bundle.user_text.clone(),
                },
            ],
            options: SamplingOptions {
                temperature: self.temperature,
                top_k: self.top_k,
                top_p: self.top_p,
                seed,
            },
            stream: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingOptions {
    pub temperature: f64,
    pub top_k: u32,
    pub top_p: f64,
    pub seed: u64,
}

/// Wire body for one chat completion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub options: SamplingOptions,
    pub stream: bool,
}

/// One attempt handed to a transport.
#[derive(Debug, Clone)]
pub struct ChatCall<'a> {
    pub request: &'a ChatRequest,
    /// [`PromptBundle::fingerprint`] of the prompt being sent.
    pub fingerprint: &'a str,
    /// 0 for the first attempt.
    pub attempt: u32,
}

pub trait Transport {
    /// Returns the assistant message text, or a transport-level failure message.
    fn complete(&mut self, call: &ChatCall<'_>) -> Result<String, String>;
}

impl<T: Transport + ?Sized> Transport for &mut T {
    fn complete(&mut self, call: &ChatCall<'_>) -> Result<String, String> {
        (**self).complete(call)
    }
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn complete(&mut self, call: &ChatCall<'_>) -> Result<String, String> {
        (**self).complete(call)
    }
}

/// Blocking HTTP POST of [`ChatRequest`] JSON.
///
/// Accepts Ollama (`message.content`, `response`) and OpenAI-style
/// (`choices[0].message.content`) reply shapes.
pub struct HttpTransport {
    endpoint: String,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        Self {
            endpoint: endpoint.into(),
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }

    pub fn from_config(cfg: &GenerationConfig) -> Self {
        Self::new(cfg.endpoint_url.clone(), Duration::from_secs_f64(cfg.timeout_s))
    }
}

impl Transport for HttpTransport {
    fn complete(&mut self, call: &ChatCall<'_>) -> Result<String, String> {
        let reply: serde_json::Value = self
            .agent
            .post(&self.endpoint)
            .send_json(call.request)
            .map_err(|e| e.to_string())?
            .into_json()
            .map_err(|e| format!("invalid JSON reply: {e}"))?;
        let content = reply
            .pointer("/message/content")
            .or_else(|| reply.pointer("/choices/0/message/content"))
            .or_else(|| reply.get("response"))
            .and_then(|v| v.as_str());
        content
            .map(str::to_string)
            .ok_or_else(|| format!("reply has no message content: {reply}"))
    }
}

/// On-disk transcript: the raw reply for each attempt of one prompt.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    #[serde(default)]
    pub fingerprint: String,
    pub responses: Vec<String>,
}

impl Transcript {
    pub fn path(dir: &Path, fingerprint: &str) -> PathBuf {
        dir.join(format!("{fingerprint}.json"))
    }

    pub fn load(dir: &Path, fingerprint: &str) -> Result<Self, String> {
        let path = Self::path(dir, fingerprint);
        let raw = std::fs::read_to_string(&path)
            .map_err(|e| format!("no transcript at {}: {e}", path.display()))?;
        serde_json::from_str(&raw).map_err(|e| format!("bad transcript {}: {e}", path.display()))
    }

    pub fn store(&self, dir: &Path) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = Self::path(dir, &self.fingerprint);
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

/// Serves canned replies from `<dir>/<fingerprint>.json`.
pub struct ReplayTransport {
    dir: PathBuf,
}

impl ReplayTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }
}

impl Transport for ReplayTransport {
    fn complete(&mut self, call: &ChatCall<'_>) -> Result<String, String> {
        let transcript = Transcript::load(&self.dir, call.fingerprint)?;
        transcript
            .responses
            .get(call.attempt as usize)
            .cloned()
            .ok_or_else(|| {
                format!(
                    "transcript {} has no reply for attempt {}",
                    call.fingerprint,
                    call.attempt + 1
                )
            })
    }
}

/// Wraps another transport and appends every reply to a transcript in `dir`.
pub struct RecordingTransport<T> {
    inner: T,
    dir: PathBuf,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T, dir: impl Into<PathBuf>) -> Self {
        Self {
            inner,
            dir: dir.into(),
        }
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn complete(&mut self, call: &ChatCall<'_>) -> Result<String, String> {
        let reply = self.inner.complete(call)?;
        let mut transcript = match call.attempt {
            0 => Transcript::default(),
            _ => Transcript::load(&self.dir, call.fingerprint).unwrap_or_default(),
        };
        transcript.fingerprint = call.fingerprint.to_string();
        transcript.responses.truncate(call.attempt as usize);
        transcript.responses.push(reply.clone());
        if let Err(e) = transcript.store(&self.dir) {
            log::warn!("could not record transcript {}: {e}", call.fingerprint);
        }
        Ok(reply)
    }
}

/// In-memory script of replies, consumed in order; records every request it sees.
#[derive(Debug, Default)]
pub struct ScriptedTransport {
    script: VecDeque<Result<String, String>>,
    pub requests: Vec<ChatRequest>,
}

impl ScriptedTransport {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            script: replies.into_iter().map(|r| Ok(r.into())).collect(),
            requests: Vec::new(),
        }
    }

    pub fn push_failure(&mut self, message: impl Into<String>) {
        self.script.push_back(Err(message.into()));
    }

    pub fn push_reply(&mut self, reply: impl Into<String>) {
        self.script.push_back(Ok(reply.into()));
    }
}

impl Transport for ScriptedTransport {
    fn complete(&mut self, call: &ChatCall<'_>) -> Result<String, String> {
        self.requests.push(call.request.clone());
        self.script
            .pop_front()
            .unwrap_or_else(|| Err("script exhausted".to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResponseDiagnosis {
    Ok,
    DescribedNotCoded,
    MalformedFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenerationOutcome {
    Ok,
    DescribedNotCoded,
    MalformedFormat,
    Reverted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    /// Extracted code; the original definition when reverted.
    pub code_text: Option<String>,
    /// Reply of the final attempt.
    pub raw_response: String,
    pub attempts: u32,
    pub elapsed_s: f64,
    pub generated_line_count: usize,
    pub outcome: GenerationOutcome,
    /// Per-attempt diagnosis, `None` where the transport failed.
    pub attempt_log: Vec<Option<ResponseDiagnosis>>,
}

/// Sends `bundle`, retrying content failures with `seed + attempt`, and
/// falls back to the original definition when every attempt fails.
pub fn transform_function<T: Transport>(
    bundle: &PromptBundle,
    cfg: &GenerationConfig,
    original: &FunctionDef,
    transport: &mut T,
) -> Result<GenerationResult, GatewayError> {
    cfg.validate()?;
    let started = Instant::now();
    let fingerprint = bundle.fingerprint();
    let mut attempt_log = Vec::new();
    let mut last_raw = String::new();
    let mut last_transport_error = None;

    for attempt in 0..=cfg.max_retries {
        let request = cfg.request(bundle, cfg.seed.wrapping_add(u64::from(attempt)));
        let call = ChatCall {
            request: &request,
            fingerprint: &fingerprint,
            attempt,
        };
        match transport.complete(&call) {
            Err(message) => {
                log::warn!("attempt {} for {:?}: transport failure: {message}", attempt + 1, bundle.target_names);
                attempt_log.push(None);
                last_transport_error = Some(message);
            }
            Ok(raw) => {
                last_transport_error = None;
                let (code, diagnosis) = parse_response(&raw, bundle.language);
                attempt_log.push(Some(diagnosis));
                last_raw = raw;
                if let Some(code) = code {
                    return Ok(GenerationResult {
                        generated_line_count: code.lines().count(),
                        code_text: Some(code),
                        raw_response: last_raw,
                        attempts: attempt + 1,
                        elapsed_s: started.elapsed().as_secs_f64(),
                        outcome: GenerationOutcome::Ok,
                        attempt_log,
                    });
                }
                log::info!("attempt {} for {:?}: {diagnosis:?}", attempt + 1, bundle.target_names);
            }
        }
    }

    let attempts = cfg.max_retries + 1;
    if let Some(message) = last_transport_error {
        return Err(GatewayError::Transport { attempts, message });
    }
    Ok(GenerationResult {
        generated_line_count: original.body_text.lines().count(),
        code_text: Some(original.body_text.clone()),
        raw_response: last_raw,
        attempts,
        elapsed_s: started.elapsed().as_secs_f64(),
        outcome: GenerationOutcome::Reverted,
        attempt_log,
    })
}

fn tag_matches(tag: &str, language: Language) -> bool {
    let tag = tag.to_ascii_lowercase();
    match language {
        Language::C => matches!(tag.as_str(), "c" | "h"),
        Language::Cpp => matches!(tag.as_str(), "cpp" | "c++" | "cc" | "cxx" | "hpp"),
    }
}

fn is_c_family(tag: &str) -> bool {
    tag_matches(tag, Language::C) || tag_matches(tag, Language::Cpp)
}

struct Fence<'a> {
    tag: &'a str,
    lines: Vec<&'a str>,
    closed: bool,
}

fn fences(raw: &str) -> Vec<Fence<'_>> {
    let mut out: Vec<Fence<'_>> = Vec::new();
    let mut open = false;
    for line in raw.split('\n') {
        let trimmed = line.trim();
        if open {
            let fence = out.last_mut().expect("open fence exists");
            if trimmed == "```" {
                fence.closed = true;
                open = false;
            } else {
                fence.lines.push(line.strip_suffix('\r').unwrap_or(line));
            }
        } else if let Some(tag) = trimmed.strip_prefix("```") {
            out.push(Fence {
                tag: tag.trim(),
                lines: Vec::new(),
                closed: false,
            });
            open = true;
        }
    }
    out
}

fn interior(lines: &[&str]) -> Option<String> {
    let start = lines.iter().position(|l| !l.trim().is_empty())?;
    let end = lines.iter().rposition(|l| !l.trim().is_empty())?;
    Some(lines[start..=end].join("\n"))
}

/// Extracts the code from a model reply.
///
/// Blocks tagged with the file's language win (concatenated when there are
/// several), then an untagged block, then a block tagged with the other C
/// family language.
pub fn parse_response(raw: &str, language: Language) -> (Option<String>, ResponseDiagnosis) {
    let blocks = fences(raw);
    if blocks.is_empty() {
        return (None, ResponseDiagnosis::DescribedNotCoded);
    }
    if blocks.iter().any(|b| !b.closed) {
        return (None, ResponseDiagnosis::MalformedFormat);
    }

    let tagged: Vec<String> = blocks
        .iter()
        .filter(|b| tag_matches(b.tag, language))
        .filter_map(|b| interior(&b.lines))
        .collect();
    if tagged.len() > 1 {
        log::warn!("reply has {} {} blocks; concatenating", tagged.len(), language);
    }
    let code = if !tagged.is_empty() {
        Some(tagged.join("\n\n"))
    } else {
        blocks
            .iter()
            .filter(|b| b.tag.is_empty())
            .chain(blocks.iter().filter(|b| is_c_family(b.tag)))
            .find_map(|b| interior(&b.lines))
    };
    match code {
        Some(code) => (Some(code), ResponseDiagnosis::Ok),
        None => (None, ResponseDiagnosis::MalformedFormat),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extractor::{parse_file, SourceFile};
    use crate::prompt::gen_prompt;
    use crate::strategies::{get_strategy, StrategyId};

    fn fixture() -> (PromptBundle, FunctionDef) {
        let ctx = parse_file(&SourceFile::new(
            "t.cpp",
            Language::Cpp,
            "int f(int a) {\n    return a + 1;\n}\n",
        ))
        .unwrap();
        let f = ctx.functions[0].clone();
        let bundle = gen_prompt(&get_strategy(StrategyId::Optimization), &[&f], &ctx, None).unwrap();
        (bundle, f)
    }

    const VALID: &str = "```cpp\nint f(int a) {\n    return 1 + a;\n}\n```\n";
    const PROSE: &str = "This function increments its argument by one.";
    const MALFORMED: &str = "```cpp\nint f(int a) {\n    return 1 +";

    #[test]
    fn parse_single_block() {
        let (code, diag) = parse_response(VALID, Language::Cpp);
        assert_eq!(diag, ResponseDiagnosis::Ok);
        assert_eq!(code.unwrap(), "int f(int a) {\n    return 1 + a;\n}");
    }

    #[test]
    fn parse_failures() {
        assert_eq!(parse_response(PROSE, Language::Cpp), (None, ResponseDiagnosis::DescribedNotCoded));
        assert_eq!(parse_response(MALFORMED, Language::Cpp), (None, ResponseDiagnosis::MalformedFormat));
        assert_eq!(parse_response("```cpp\n\n```", Language::Cpp), (None, ResponseDiagnosis::MalformedFormat));
        assert_eq!(
            parse_response("```python\nprint(1)\n```", Language::C),
            (None, ResponseDiagnosis::MalformedFormat)
        );
    }

    #[test]
    fn parse_tag_rules() {
        let raw = "Here:\n```CPP  \nint a;\n```\ntext\n```\nint b;\n```\n```c++\nint c;\n```";
        assert_eq!(parse_response(raw, Language::Cpp).0.unwrap(), "int a;\n\nint c;");
        assert_eq!(parse_response(raw, Language::C).0.unwrap(), "int b;");
        let only_cpp = "```cpp\nint x;\n```";
        assert_eq!(parse_response(only_cpp, Language::C).0.unwrap(), "int x;");
        let crlf = "```c\r\nint x;\r\n```\r\n";
        assert_eq!(parse_response(crlf, Language::C).0.unwrap(), "int x;");
    }

    #[test]
    fn happy_path() {
        let (bundle, f) = fixture();
        let mut t = ScriptedTransport::new([VALID]);
        let r = transform_function(&bundle, &GenerationConfig::default(), &f, &mut t).unwrap();
        assert_eq!(r.outcome, GenerationOutcome::Ok);
        assert_eq!(r.attempts, 1);
        assert_eq!(r.generated_line_count, 3);
        let req = &t.requests[0];
        assert_eq!(req.messages[0].role, "system");
        assert_eq!(req.messages[1].content, bundle.user_text);
        assert_eq!(req.options.temperature, 0.8);
        assert_eq!(req.options.top_k, 40);
        assert!(!req.stream);
    }

    #[test]
    fn prose_six_times_reverts() {
        let (bundle, f) = fixture();
        let mut t = ScriptedTransport::new([PROSE; 6]);
        let cfg = GenerationConfig {
            seed: 7,
            ..Default::default()
        };
        let r = transform_function(&bundle, &cfg, &f, &mut t).unwrap();
        assert_eq!(r.outcome, GenerationOutcome::Reverted);
        assert_eq!(r.attempts, 6);
        assert_eq!(r.code_text.as_deref(), Some(f.body_text.as_str()));
        let seeds: Vec<_> = t.requests.iter().map(|r| r.options.seed).collect();
        assert_eq!(seeds, [7, 8, 9, 10, 11, 12]);
    }

    #[test]
    fn malformed_twice_then_valid() {
        let (bundle, f) = fixture();
        let mut t = ScriptedTransport::new([MALFORMED, MALFORMED, VALID]);
        let r = transform_function(&bundle, &GenerationConfig::default(), &f, &mut t).unwrap();
        assert_eq!(r.outcome, GenerationOutcome::Ok);
        assert_eq!(r.attempts, 3);
        assert_eq!(
            r.attempt_log,
            [
                Some(ResponseDiagnosis::MalformedFormat),
                Some(ResponseDiagnosis::MalformedFormat),
                Some(ResponseDiagnosis::Ok)
            ]
        );
    }

    #[test]
    fn transport_errors() {
        let (bundle, f) = fixture();
        let mut t = ScriptedTransport::default();
        t.push_failure("connection refused");
        t.push_reply(VALID);
        let r = transform_function(&bundle, &GenerationConfig::default(), &f, &mut t).unwrap();
        assert_eq!(r.attempts, 2);

        let mut t = ScriptedTransport::default();
        let cfg = GenerationConfig {
            max_retries: 1,
            ..Default::default()
        };
        let err = transform_function(&bundle, &cfg, &f, &mut t).unwrap_err();
        assert!(matches!(err, GatewayError::Transport { attempts: 2, .. }));
    }

    #[test]
    fn config_validation() {
        let (bundle, f) = fixture();
        for cfg in [
            GenerationConfig { temperature: -1.0, ..Default::default() },
            GenerationConfig { top_p: 0.0, ..Default::default() },
            GenerationConfig { top_p: 1.5, ..Default::default() },
            GenerationConfig { top_k: 0, ..Default::default() },
        ] {
            let mut t = ScriptedTransport::new([VALID]);
            assert!(matches!(
                transform_function(&bundle, &cfg, &f, &mut t),
                Err(GatewayError::Config(_))
            ));
        }
    }

    #[test]
    fn replay_and_record() {
        let dir = tempfile::tempdir().unwrap();
        let (bundle, f) = fixture();
        let mut scripted = ScriptedTransport::new([PROSE, VALID]);
        let mut recorder = RecordingTransport::new(&mut scripted, dir.path());
        let live = transform_function(&bundle, &GenerationConfig::default(), &f, &mut recorder).unwrap();
        let stored = Transcript::load(dir.path(), &bundle.fingerprint()).unwrap();
        assert_eq!(stored.responses, [PROSE, VALID]);

        let mut replay = ReplayTransport::new(dir.path());
        let replayed = transform_function(&bundle, &GenerationConfig::default(), &f, &mut replay).unwrap();
        assert_eq!(replayed.code_text, live.code_text);
        assert_eq!(replayed.attempts, 2);
    }
}
