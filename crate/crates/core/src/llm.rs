//! Chat providers and the four prompt roles of the inference loop:
//! chain-of-thought reasoning, answer generation, answer judging, and
//! query rewriting.
//!
//! Two providers ship in the box:
//!
//! - `scripted`: fully offline replay from a scenario file. Responses are
//!   looked up by prompt fingerprint when one matches, otherwise consumed
//!   in order per role. Multi-iteration runs replay byte-identically.
//! - `remote-chat`: OpenAI-compatible chat completions over HTTP. API key
//!   from `VENDI_LLM_API_KEY`, endpoint from the spec or
//!   `VENDI_LLM_ENDPOINT`. Temperature defaults to 0 so reruns are as
//!   reproducible as the backend allows.
//!
//! Prompt templates live in versioned text files under `prompts/`,
//! compiled in as defaults and overridable from a directory at runtime.
//! The judge template is a frozen artifact: golden tests pin its exact
//! bytes, and the structured-output instruction is appended at assembly
//! time rather than edited into it.

use crate::chunk::Chunk;
use crate::embed::InFlightGate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

/// Env var holding the API key for the remote chat endpoint.
pub const LLM_API_KEY_VAR: &str = "VENDI_LLM_API_KEY";
/// Env var holding the remote chat endpoint URL.
pub const LLM_ENDPOINT_VAR: &str = "VENDI_LLM_ENDPOINT";
/// Default whitespace-token budget for an assembled prompt.
pub const DEFAULT_CONTEXT_BUDGET: usize = 128_000;

/// Appended to the judge prompt at assembly time; the judge template file
/// itself stays untouched.
pub const JUDGE_FORMAT_INSTRUCTION: &str = "Respond with exactly one JSON object of the form \
     {\"C\": <integer 1-10>, \"R\": <integer 1-10>, \"Q\": <integer 1-10>} and nothing else.";

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("chat provider failed after {attempts} attempt(s): {message}{}",
            if *.retryable { " (retryable)" } else { "" })]
    Provider {
        message: String,
        attempts: u32,
        retryable: bool,
    },

    #[error("prompt needs {needed} tokens but the context budget is {budget}")]
    ContextOverflow { budget: usize, needed: usize },

    #[error("judge response is not a C/R/Q JSON object: {raw:?}")]
    JudgeParse { raw: String },

    #[error("judge score {field} = {value} is outside [1, 10]")]
    JudgeRange { field: &'static str, value: f64 },

    #[error("scenario has no response for role {role} (key {key:?})")]
    ScenarioMissing { role: &'static str, key: String },

    #[error("bad scenario file {path}: {message}")]
    Scenario { path: String, message: String },

    #[error("bad prompt template {path}: {message}")]
    Template { path: String, message: String },

    #[error("{what} must not be empty")]
    EmptyInput { what: &'static str },

    #[error("remote provider requires an endpoint (set {LLM_ENDPOINT_VAR} or the config)")]
    MissingEndpoint,
}

/// The four prompt roles of one loop iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptRole {
    Reasoning,
    Answer,
    Judge,
    Rewrite,
}

impl PromptRole {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptRole::Reasoning => "reasoning",
            PromptRole::Answer => "answer",
            PromptRole::Judge => "judge",
            PromptRole::Rewrite => "rewrite",
        }
    }
}

/// Which provider implementation to construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LlmKind {
    Scripted,
    RemoteChat,
}

/// Declarative description of a chat provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmProviderSpec {
    pub kind: LlmKind,
    pub model_name: String,
    pub endpoint: Option<String>,
    /// Sampling temperature. 0 by default; raise only deliberately.
    pub temperature: f64,
    pub max_in_flight: usize,
    pub timeout_secs: u64,
    /// Scenario file for the scripted provider.
    pub scenario_path: Option<PathBuf>,
    /// Whitespace-token budget enforced on assembled prompts.
    pub context_budget: usize,
}

impl LlmProviderSpec {
    pub fn scripted(scenario_path: impl Into<PathBuf>) -> Self {
        Self {
            kind: LlmKind::Scripted,
            model_name: "scripted".to_string(),
            endpoint: None,
            temperature: 0.0,
            max_in_flight: 1,
            timeout_secs: 60,
            scenario_path: Some(scenario_path.into()),
            context_budget: DEFAULT_CONTEXT_BUDGET,
        }
    }

    pub fn remote(endpoint: Option<String>, model_name: &str) -> Self {
        Self {
            kind: LlmKind::RemoteChat,
            model_name: model_name.to_string(),
            endpoint,
            temperature: 0.0,
            max_in_flight: 4,
            timeout_secs: 60,
            scenario_path: None,
            context_budget: DEFAULT_CONTEXT_BUDGET,
        }
    }
}

/// A chat completion backend. One call per prompt; implementations must
/// tolerate concurrent calls.
pub trait ChatProvider: Send + Sync {
    fn spec(&self) -> &LlmProviderSpec;

    fn complete(&self, role: PromptRole, prompt: &str) -> Result<String, LlmError>;
}

/// Constructs the provider named by a spec.
pub fn build_chat_provider(spec: &LlmProviderSpec) -> Result<Box<dyn ChatProvider>, LlmError> {
    match spec.kind {
        LlmKind::Scripted => {
            let path = spec.scenario_path.clone().ok_or(LlmError::Scenario {
                path: "<none>".to_string(),
                message: "scripted provider requires a scenario file".to_string(),
            })?;
            Ok(Box::new(ScriptedProvider::from_file(spec.clone(), &path)?))
        }
        LlmKind::RemoteChat => Ok(Box::new(RemoteChatProvider::new(spec.clone()))),
    }
}

/// FNV-1a hash of a prompt, as 16 lowercase hex digits. Scenario files use
/// these as exact-match keys.
pub fn prompt_fingerprint(prompt: &str) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in prompt.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

// ── Scripted provider ───────────────────────────────────────────────────

/// One role's canned responses in a scenario file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RoleScript {
    /// Exact-match responses keyed by prompt fingerprint.
    #[serde(default)]
    pub fingerprints: BTreeMap<String, String>,
    /// Fallback responses consumed in order, one per call.
    #[serde(default)]
    pub responses: Vec<String>,
}

/// A full scripted scenario: role name ("reasoning", "answer", "judge",
/// "rewrite") to its script.
pub type Scenario = BTreeMap<String, RoleScript>;

/// Offline provider replaying a scenario. Fingerprint matches win over
/// ordinal consumption; ordinal state is serialized behind a mutex so
/// concurrent calls see a consistent order.
pub struct ScriptedProvider {
    spec: LlmProviderSpec,
    scenario: Scenario,
    cursors: Mutex<BTreeMap<&'static str, usize>>,
}

impl ScriptedProvider {
    pub fn new(spec: LlmProviderSpec, scenario: Scenario) -> Self {
        Self {
            spec,
            scenario,
            cursors: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn from_file(spec: LlmProviderSpec, path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path).map_err(|e| LlmError::Scenario {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let scenario: Scenario =
            serde_json::from_str(&text).map_err(|e| LlmError::Scenario {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        Ok(Self::new(spec, scenario))
    }
}

impl ChatProvider for ScriptedProvider {
    fn spec(&self) -> &LlmProviderSpec {
        &self.spec
    }

    fn complete(&self, role: PromptRole, prompt: &str) -> Result<String, LlmError> {
        let name = role.as_str();
        let script = self.scenario.get(name).ok_or(LlmError::ScenarioMissing {
            role: name,
            key: "<no script for role>".to_string(),
        })?;
        let fingerprint = prompt_fingerprint(prompt);
        if let Some(response) = script.fingerprints.get(&fingerprint) {
            return Ok(response.clone());
        }
        let mut cursors = self.cursors.lock().unwrap();
        let cursor = cursors.entry(name).or_insert(0);
        match script.responses.get(*cursor) {
            Some(response) => {
                *cursor += 1;
                Ok(response.clone())
            }
            None => Err(LlmError::ScenarioMissing {
                role: name,
                key: fingerprint,
            }),
        }
    }
}

// ── Remote chat provider ────────────────────────────────────────────────

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    content: String,
}

/// Serialized request body for one prompt. Field order is fixed by the
/// struct, so identical inputs produce identical bytes.
pub fn chat_request_bytes(model: &str, prompt: &str, temperature: f64) -> Vec<u8> {
    let request = ChatRequest {
        model,
        messages: vec![ChatMessage {
            role: "user",
            content: prompt,
        }],
        temperature,
    };
    serde_json::to_vec(&request).expect("request serializes")
}

/// HTTP provider speaking the OpenAI-compatible chat-completions shape.
pub struct RemoteChatProvider {
    spec: LlmProviderSpec,
    client: reqwest::blocking::Client,
    gate: InFlightGate,
}

impl RemoteChatProvider {
    pub fn new(spec: LlmProviderSpec) -> Self {
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(spec.timeout_secs))
            .build()
            .expect("client builds");
        let gate = InFlightGate::new(spec.max_in_flight);
        Self { spec, client, gate }
    }

    fn endpoint(&self) -> Result<String, LlmError> {
        if let Some(endpoint) = &self.spec.endpoint {
            return Ok(endpoint.clone());
        }
        std::env::var(LLM_ENDPOINT_VAR).map_err(|_| LlmError::MissingEndpoint)
    }
}

impl ChatProvider for RemoteChatProvider {
    fn spec(&self) -> &LlmProviderSpec {
        &self.spec
    }

    fn complete(&self, _role: PromptRole, prompt: &str) -> Result<String, LlmError> {
        let endpoint = self.endpoint()?;
        let body = chat_request_bytes(&self.spec.model_name, prompt, self.spec.temperature);
        let mut request = self
            .client
            .post(&endpoint)
            .header("content-type", "application/json")
            .body(body);
        if let Ok(key) = std::env::var(LLM_API_KEY_VAR) {
            request = request.bearer_auth(key);
        }
        let response = self.gate.run(|| request.send()).map_err(|e| {
            LlmError::Provider {
                message: e.to_string(),
                attempts: 1,
                retryable: e.is_timeout() || e.is_connect(),
            }
        })?;
        let status = response.status();
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            return Err(LlmError::Provider {
                message: format!("HTTP {status}: {text}"),
                attempts: 1,
                retryable: status.is_server_error() || status.as_u16() == 429,
            });
        }
        let parsed: ChatResponse = response.json().map_err(|e| LlmError::Provider {
            message: format!("bad response body: {e}"),
            attempts: 1,
            retryable: false,
        })?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or(LlmError::Provider {
                message: "response had no choices".to_string(),
                attempts: 1,
                retryable: false,
            })
    }
}

// ── Prompt templates and assembly ───────────────────────────────────────

/// The four prompt templates. Built-in copies are compiled in from
/// `prompts/`; `from_dir` loads overrides from disk.
#[derive(Debug, Clone)]
pub struct PromptTemplates {
    pub reasoning: String,
    pub answer: String,
    pub judge: String,
    pub rewrite: String,
}

impl PromptTemplates {
    pub fn builtin() -> Self {
        Self {
            reasoning: include_str!("../prompts/reasoning.txt").to_string(),
            answer: include_str!("../prompts/answer.txt").to_string(),
            judge: include_str!("../prompts/judge.txt").to_string(),
            rewrite: include_str!("../prompts/rewrite.txt").to_string(),
        }
    }

    /// Loads `reasoning.txt`, `answer.txt`, `judge.txt`, and
    /// `rewrite.txt` from a directory.
    pub fn from_dir(dir: &Path) -> Result<Self, LlmError> {
        let read = |name: &str| -> Result<String, LlmError> {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|e| LlmError::Template {
                path: path.display().to_string(),
                message: e.to_string(),
            })
        };
        Ok(Self {
            reasoning: read("reasoning.txt")?,
            answer: read("answer.txt")?,
            judge: read("judge.txt")?,
            rewrite: read("rewrite.txt")?,
        })
    }
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Chunks rendered for a prompt: numbered, in selection order, title
/// header first.
pub fn format_documents(chunks: &[Chunk]) -> String {
    chunks
        .iter()
        .enumerate()
        .map(|(i, c)| format!("[{}] {}\n{}", i + 1, c.title.trim(), c.text))
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn format_history(history: &[String]) -> String {
    history
        .iter()
        .enumerate()
        .map(|(i, r)| format!("Iteration {}:\n{}", i + 1, r))
        .collect::<Vec<_>>()
        .join("\n\n")
}

pub fn assemble_reasoning_prompt(
    templates: &PromptTemplates,
    question: &str,
    chunks: &[Chunk],
) -> String {
    templates
        .reasoning
        .replace("{question}", question)
        .replace("{documents}", &format_documents(chunks))
}

pub fn assemble_answer_prompt(
    templates: &PromptTemplates,
    question: &str,
    chunks: &[Chunk],
    history: &[String],
) -> String {
    templates
        .answer
        .replace("{question}", question)
        .replace("{documents}", &format_documents(chunks))
        .replace("{reasoning_history}", &format_history(history))
}

/// The judge template with the query substituted, followed by the
/// documents, the candidate answer, and the structured-output
/// instruction.
pub fn assemble_judge_prompt(
    templates: &PromptTemplates,
    question: &str,
    answer: &str,
    chunks: &[Chunk],
) -> String {
    format!(
        "{}\nRetrieved documents:\n{}\n\nCandidate answer: {}\n\n{}",
        templates.judge.replace("{query}", question),
        format_documents(chunks),
        answer,
        JUDGE_FORMAT_INSTRUCTION,
    )
}

pub fn assemble_rewrite_prompt(
    templates: &PromptTemplates,
    question: &str,
    answer: &str,
    reasoning: &str,
) -> String {
    templates
        .rewrite
        .replace("{question}", question)
        .replace("{answer}", answer)
        .replace("{reasoning}", reasoning)
}

/// Enforces the whitespace-token context budget, then runs the prompt.
fn complete_checked(
    provider: &dyn ChatProvider,
    role: PromptRole,
    prompt: &str,
) -> Result<String, LlmError> {
    let budget = provider.spec().context_budget;
    let needed = prompt.split_whitespace().count();
    if needed > budget {
        return Err(LlmError::ContextOverflow { budget, needed });
    }
    provider.complete(role, prompt)
}

// ── The four operations ─────────────────────────────────────────────────

/// Chain-of-thought reasoning over the selected documents.
pub fn generate_reasoning(
    provider: &dyn ChatProvider,
    templates: &PromptTemplates,
    question: &str,
    chunks: &[Chunk],
) -> Result<String, LlmError> {
    if chunks.is_empty() {
        return Err(LlmError::EmptyInput { what: "documents" });
    }
    let prompt = assemble_reasoning_prompt(templates, question, chunks);
    complete_checked(provider, PromptRole::Reasoning, &prompt)
}

/// Candidate answer from the documents and the full reasoning history,
/// oldest first.
pub fn generate_answer(
    provider: &dyn ChatProvider,
    templates: &PromptTemplates,
    question: &str,
    chunks: &[Chunk],
    history: &[String],
) -> Result<String, LlmError> {
    if chunks.is_empty() {
        return Err(LlmError::EmptyInput { what: "documents" });
    }
    let prompt = assemble_answer_prompt(templates, question, chunks, history);
    complete_checked(provider, PromptRole::Answer, &prompt)
}

/// Scores parsed from a judge response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub coherence: f64,
    pub relevance: f64,
    pub alignment: f64,
    /// Mean of the three component scores, in [1, 10].
    pub quality: f64,
    pub raw_response: String,
}

impl JudgeVerdict {
    /// Quality rescaled to [0, 1] for threshold comparison.
    pub fn q_norm(&self) -> f64 {
        self.quality / 10.0
    }
}

#[derive(Deserialize)]
struct JudgeScores {
    #[serde(rename = "C")]
    c: f64,
    #[serde(rename = "R")]
    r: f64,
    #[serde(rename = "Q")]
    q: f64,
}

/// Strips a Markdown code fence if the response arrived wrapped in one.
fn strip_fence(raw: &str) -> &str {
    let trimmed = raw.trim();
    let Some(inner) = trimmed.strip_prefix("```") else {
        return trimmed;
    };
    let inner = inner.strip_prefix("json").unwrap_or(inner);
    inner.strip_suffix("```").unwrap_or(inner).trim()
}

/// Scores a candidate answer with the judge prompt. The response must be
/// a JSON object with numeric C, R, and Q fields, each in [1, 10]; the
/// quality score is their mean. No field is ever defaulted.
pub fn judge_answer(
    provider: &dyn ChatProvider,
    templates: &PromptTemplates,
    question: &str,
    answer: &str,
    chunks: &[Chunk],
) -> Result<JudgeVerdict, LlmError> {
    if answer.trim().is_empty() {
        return Err(LlmError::EmptyInput { what: "answer" });
    }
    let prompt = assemble_judge_prompt(templates, question, answer, chunks);
    let raw = complete_checked(provider, PromptRole::Judge, &prompt)?;
    let scores: JudgeScores =
        serde_json::from_str(strip_fence(&raw)).map_err(|_| LlmError::JudgeParse {
            raw: raw.clone(),
        })?;
    for (field, value) in [("C", scores.c), ("R", scores.r), ("Q", scores.q)] {
        if !(1.0..=10.0).contains(&value) {
            return Err(LlmError::JudgeRange { field, value });
        }
    }
    Ok(JudgeVerdict {
        coherence: scores.c,
        relevance: scores.r,
        alignment: scores.q,
        quality: (scores.c + scores.r + scores.q) / 3.0,
        raw_response: raw,
    })
}

/// Rewrites the query for the next retrieval round. An empty provider
/// response falls back to the original question with a warning; the loop
/// never proceeds with an empty query.
pub fn rewrite_query(
    provider: &dyn ChatProvider,
    templates: &PromptTemplates,
    question: &str,
    answer: &str,
    reasoning: &str,
) -> Result<String, LlmError> {
    if question.trim().is_empty() {
        return Err(LlmError::EmptyInput { what: "question" });
    }
    let prompt = assemble_rewrite_prompt(templates, question, answer, reasoning);
    let rewritten = complete_checked(provider, PromptRole::Rewrite, &prompt)?;
    let trimmed = rewritten.trim();
    if trimmed.is_empty() {
        log::warn!("rewrite returned empty text; keeping original query");
        return Ok(question.to_string());
    }
    Ok(trimmed.to_string())
}
