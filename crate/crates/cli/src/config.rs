//! Layered configuration: built-in defaults, then the TOML config file,
//! then environment variables, then command-line flags. Every output
//! artifact echoes the fully-resolved configuration for provenance.

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use vendi_core::embed::{
    EmbeddingProviderSpec, DEFAULT_REMOTE_DIM, DEFAULT_REMOTE_MODEL, DEFAULT_TEST_DIM,
};
use vendi_core::index::VectorIndex;
use vendi_core::llm::{LlmProviderSpec, PromptTemplates, LLM_ENDPOINT_VAR};
use vendi_core::pipeline::{PipelineConfig, SSchedule};
use vendi_core::retrieval::RetrievalConfig;

/// Errors split by exit code: usage problems (bad flags, bad config
/// files, contradictory settings) exit 2; operational failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Run(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

macro_rules! run_error_from {
    ($($ty:ty),* $(,)?) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Run(e.to_string())
            }
        }
    )*};
}

run_error_from!(
    vendi_core::embed::EmbedError,
    vendi_core::index::IndexError,
    vendi_core::llm::LlmError,
    vendi_core::retrieval::RetrievalError,
    vendi_core::pipeline::PipelineError,
    vendi_core::eval::EvalError,
    std::io::Error,
    serde_json::Error,
    csv::Error,
);

// ── Flag groups shared across subcommands ───────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbedderChoice {
    /// Offline hash-based embedder; reproducible with `--dim`/`--embed-seed`.
    Deterministic,
    /// OpenAI-compatible embeddings endpoint.
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LlmChoice {
    /// Offline provider replaying a scenario file.
    Scripted,
    /// OpenAI-compatible chat-completions endpoint.
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleChoice {
    Dynamic,
    Fixed,
}

impl From<ScheduleChoice> for SSchedule {
    fn from(choice: ScheduleChoice) -> Self {
        match choice {
            ScheduleChoice::Dynamic => SSchedule::Dynamic,
            ScheduleChoice::Fixed => SSchedule::Fixed,
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct EmbeddingArgs {
    /// Embedding backend. Defaults to the one recorded in the index, or
    /// to `deterministic` when building a new index.
    #[arg(long, value_enum)]
    pub embedder: Option<EmbedderChoice>,

    /// Embedding dimension.
    #[arg(long, value_name = "N")]
    pub dim: Option<usize>,

    /// Seed for the deterministic embedder.
    #[arg(long, value_name = "SEED")]
    pub embed_seed: Option<u64>,

    /// Embedding model name.
    #[arg(long, value_name = "NAME")]
    pub embed_model: Option<String>,

    /// Embeddings endpoint URL (remote backend).
    #[arg(long, value_name = "URL")]
    pub embed_endpoint: Option<String>,

    /// Texts per embedding request.
    #[arg(long, value_name = "N")]
    pub batch_size: Option<usize>,
}

impl EmbeddingArgs {
    /// Whether any flag other than the endpoint was given. The endpoint
    /// alone completes an index fingerprint rather than overriding it.
    fn overrides_fingerprint(&self) -> bool {
        self.embedder.is_some()
            || self.dim.is_some()
            || self.embed_seed.is_some()
            || self.embed_model.is_some()
            || self.batch_size.is_some()
    }
}

#[derive(Debug, Default, Args)]
pub struct LlmArgs {
    /// Chat backend. `--scenario` implies `scripted`.
    #[arg(long, value_enum)]
    pub llm: Option<LlmChoice>,

    /// Scenario file for the scripted backend.
    #[arg(long, value_name = "FILE")]
    pub scenario: Option<PathBuf>,

    /// Chat model name (remote backend).
    #[arg(long, value_name = "NAME")]
    pub model: Option<String>,

    /// Chat endpoint URL. Falls back to $VENDI_LLM_ENDPOINT.
    #[arg(long, value_name = "URL")]
    pub llm_endpoint: Option<String>,

    /// Sampling temperature.
    #[arg(long, value_name = "T")]
    pub temperature: Option<f64>,

    /// Directory of prompt templates (reasoning.txt, answer.txt,
    /// judge.txt, rewrite.txt) replacing the built-ins.
    #[arg(long, value_name = "DIR")]
    pub prompts: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct RetrievalArgs {
    /// Selection strategy: ss (similarity), mmr, or vendi.
    #[arg(long, value_name = "NAME")]
    pub strategy: Option<String>,

    /// Candidate pool size scanned per query.
    #[arg(long, value_name = "M")]
    pub pool: Option<usize>,

    /// Number of chunks to select.
    #[arg(long, value_name = "K")]
    pub k: Option<usize>,

    /// Diversity weight in [0, 1] for one-shot selection.
    #[arg(long, value_name = "S")]
    pub s: Option<f64>,

    /// Relevance/redundancy trade-off for the mmr strategy.
    #[arg(long, value_name = "L")]
    pub mmr_lambda: Option<f64>,

    /// Score diversity with the raw Vendi Score instead of the
    /// normalized one.
    #[arg(long)]
    pub raw_vs: bool,
}

#[derive(Debug, Default, Args)]
pub struct PipelineArgs {
    /// Initial diversity weight.
    #[arg(long, value_name = "S1")]
    pub s1: Option<f64>,

    /// Quality threshold in (0, 1] that stops the loop.
    #[arg(long, value_name = "TAU")]
    pub tau: Option<f64>,

    /// Iteration budget.
    #[arg(long = "max-iters", value_name = "N")]
    pub max_iters: Option<usize>,

    /// Diversity-weight schedule across iterations.
    #[arg(long, value_enum)]
    pub schedule: Option<ScheduleChoice>,

    /// Skip judging; run exactly one iteration.
    #[arg(long)]
    pub no_judge: bool,

    /// On budget exhaustion return the last answer instead of the
    /// best-judged one.
    #[arg(long)]
    pub strict_final: bool,

    /// Exclude chunks selected in earlier iterations from later pools.
    #[arg(long)]
    pub exclude_seen: bool,
}

// ── Config file schema ──────────────────────────────────────────────────

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileEmbedding {
    kind: Option<EmbedderChoice>,
    model: Option<String>,
    dim: Option<usize>,
    seed: Option<u64>,
    endpoint: Option<String>,
    batch_size: Option<usize>,
}

impl FileEmbedding {
    fn overrides_fingerprint(&self) -> bool {
        self.kind.is_some()
            || self.model.is_some()
            || self.dim.is_some()
            || self.seed.is_some()
            || self.batch_size.is_some()
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileLlm {
    kind: Option<LlmChoice>,
    model: Option<String>,
    endpoint: Option<String>,
    temperature: Option<f64>,
    scenario: Option<PathBuf>,
    prompts: Option<PathBuf>,
    timeout_secs: Option<u64>,
    context_budget: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileRetrieval {
    strategy: Option<String>,
    pool: Option<usize>,
    k: Option<usize>,
    s: Option<f64>,
    mmr_lambda: Option<f64>,
    raw_vs: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilePipeline {
    s1: Option<f64>,
    tau: Option<f64>,
    max_iterations: Option<usize>,
    schedule: Option<ScheduleChoice>,
    judge: Option<bool>,
    strict_final: Option<bool>,
    exclude_seen: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileChunking {
    max_tokens: Option<usize>,
    overlap: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileEval {
    jobs: Option<usize>,
    sample: Option<usize>,
    seed: Option<u64>,
    strict_acc: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    embedding: FileEmbedding,
    #[serde(default)]
    llm: FileLlm,
    #[serde(default)]
    retrieval: FileRetrieval,
    #[serde(default)]
    pipeline: FilePipeline,
    #[serde(default)]
    chunking: FileChunking,
    #[serde(default)]
    eval: FileEval,
}

// ── Resolution ──────────────────────────────────────────────────────────

pub const DEFAULT_MAX_TOKENS: usize = 512;
pub const DEFAULT_OVERLAP: usize = 50;
pub const DEFAULT_SAMPLE_SEED: u64 = 7;

enum Fingerprint {
    Deterministic { dim: usize, seed: u64 },
    Remote { model: String, dim: usize },
}

/// Parses the provider identity an index was built with, so queries can
/// reuse the exact same embedder without re-specifying it.
fn parse_fingerprint(fp: &str) -> Option<Fingerprint> {
    if let Some(rest) = fp.strip_prefix("deterministic-test:") {
        // model:dim=D:seed=S, model may itself contain colons
        let parts: Vec<&str> = rest.rsplitn(3, ':').collect();
        if parts.len() != 3 {
            return None;
        }
        let seed = parts[0].strip_prefix("seed=")?.parse().ok()?;
        let dim = parts[1].strip_prefix("dim=")?.parse().ok()?;
        Some(Fingerprint::Deterministic { dim, seed })
    } else if let Some(rest) = fp.strip_prefix("remote-http:") {
        let parts: Vec<&str> = rest.rsplitn(2, ':').collect();
        if parts.len() != 2 {
            return None;
        }
        let dim = parts[0].strip_prefix("dim=")?.parse().ok()?;
        Some(Fingerprint::Remote {
            model: parts[1].to_string(),
            dim,
        })
    } else {
        None
    }
}

#[derive(Debug)]
pub struct Resolver {
    file: FileConfig,
}

impl Resolver {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let file = match path {
            None => FileConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Usage(format!("cannot read config file {}: {e}", p.display()))
                })?;
                toml::from_str(&text).map_err(|e| {
                    CliError::Usage(format!("bad config file {}: {e}", p.display()))
                })?
            }
        };
        Ok(Self { file })
    }

    /// Embedding spec from defaults, file, and flags alone (ingest).
    pub fn embedding_spec(&self, args: &EmbeddingArgs) -> Result<EmbeddingProviderSpec, CliError> {
        let file = &self.file.embedding;
        let kind = args
            .embedder
            .or(file.kind)
            .unwrap_or(EmbedderChoice::Deterministic);
        let mut spec = match kind {
            EmbedderChoice::Deterministic => EmbeddingProviderSpec::deterministic(
                args.dim.or(file.dim).unwrap_or(DEFAULT_TEST_DIM),
                args.embed_seed.or(file.seed).unwrap_or(0),
            ),
            EmbedderChoice::Remote => {
                let endpoint = args
                    .embed_endpoint
                    .clone()
                    .or_else(|| file.endpoint.clone())
                    .ok_or_else(|| {
                        CliError::Usage(
                            "a remote embedder needs an endpoint: pass --embed-endpoint \
                             or set [embedding] endpoint in the config file"
                                .to_string(),
                        )
                    })?;
                let model = args
                    .embed_model
                    .clone()
                    .or_else(|| file.model.clone())
                    .unwrap_or_else(|| DEFAULT_REMOTE_MODEL.to_string());
                let dim = args.dim.or(file.dim).unwrap_or(DEFAULT_REMOTE_DIM);
                EmbeddingProviderSpec::remote(&endpoint, &model, dim)
            }
        };
        if kind == EmbedderChoice::Deterministic {
            if let Some(model) = args.embed_model.clone().or_else(|| file.model.clone()) {
                spec.model_name = model;
            }
        }
        if let Some(batch) = args.batch_size.or(file.batch_size) {
            spec.batch_size = batch;
        }
        Ok(spec)
    }

    /// Embedding spec for querying an existing index. Explicit settings
    /// win; otherwise the index's recorded fingerprint is reconstructed.
    /// Either way the dimension must match the index.
    pub fn embedding_spec_for_index(
        &self,
        args: &EmbeddingArgs,
        index: &VectorIndex,
    ) -> Result<EmbeddingProviderSpec, CliError> {
        let explicit =
            args.overrides_fingerprint() || self.file.embedding.overrides_fingerprint();
        let spec = if explicit {
            self.embedding_spec(args)?
        } else {
            match parse_fingerprint(&index.metadata().provider_fingerprint) {
                Some(Fingerprint::Deterministic { dim, seed }) => {
                    EmbeddingProviderSpec::deterministic(dim, seed)
                }
                Some(Fingerprint::Remote { model, dim }) => {
                    let endpoint = args
                        .embed_endpoint
                        .clone()
                        .or_else(|| self.file.embedding.endpoint.clone())
                        .ok_or_else(|| {
                            CliError::Usage(format!(
                                "the index was built with remote model {model:?}; \
                                 pass --embed-endpoint to query it"
                            ))
                        })?;
                    EmbeddingProviderSpec::remote(&endpoint, &model, dim)
                }
                None => {
                    return Err(CliError::Usage(
                        "the index does not record a usable embedder; \
                         pass --embedder and its settings explicitly"
                            .to_string(),
                    ))
                }
            }
        };
        if spec.dim != index.dim() {
            return Err(CliError::Run(format!(
                "embedder dimension {} does not match index dimension {}",
                spec.dim,
                index.dim()
            )));
        }
        Ok(spec)
    }

    pub fn llm_spec(&self, args: &LlmArgs) -> Result<LlmProviderSpec, CliError> {
        let file = &self.file.llm;
        if args.llm == Some(LlmChoice::Remote) && args.scenario.is_some() {
            return Err(CliError::Usage(
                "--scenario conflicts with --llm remote".to_string(),
            ));
        }
        let env_endpoint = std::env::var(LLM_ENDPOINT_VAR).ok();
        let kind = args
            .llm
            .or(args.scenario.is_some().then_some(LlmChoice::Scripted))
            .or(env_endpoint.is_some().then_some(LlmChoice::Remote))
            .or(file.kind)
            .or(file.scenario.is_some().then_some(LlmChoice::Scripted))
            .ok_or_else(|| {
                CliError::Usage(
                    "no LLM configured: pass --scenario <file> for offline runs, \
                     or --llm remote with --llm-endpoint and --model"
                        .to_string(),
                )
            })?;
        let mut spec = match kind {
            LlmChoice::Scripted => {
                let path = args
                    .scenario
                    .clone()
                    .or_else(|| file.scenario.clone())
                    .ok_or_else(|| {
                        CliError::Usage("a scripted LLM needs --scenario <file>".to_string())
                    })?;
                LlmProviderSpec::scripted(path)
            }
            LlmChoice::Remote => {
                let endpoint = args
                    .llm_endpoint
                    .clone()
                    .or(env_endpoint)
                    .or_else(|| file.endpoint.clone())
                    .ok_or_else(|| {
                        CliError::Usage(format!(
                            "a remote LLM needs an endpoint: pass --llm-endpoint \
                             or set ${LLM_ENDPOINT_VAR}"
                        ))
                    })?;
                let model = args
                    .model
                    .clone()
                    .or_else(|| file.model.clone())
                    .ok_or_else(|| {
                        CliError::Usage("a remote LLM needs --model <name>".to_string())
                    })?;
                LlmProviderSpec::remote(Some(endpoint), &model)
            }
        };
        if let Some(t) = args.temperature.or(file.temperature) {
            spec.temperature = t;
        }
        if let Some(t) = file.timeout_secs {
            spec.timeout_secs = t;
        }
        if let Some(b) = file.context_budget {
            spec.context_budget = b;
        }
        Ok(spec)
    }

    pub fn templates(&self, args: &LlmArgs) -> Result<PromptTemplates, CliError> {
        match args.prompts.clone().or_else(|| self.file.llm.prompts.clone()) {
            Some(dir) => PromptTemplates::from_dir(&dir)
                .map_err(|e| CliError::Usage(format!("cannot load prompt templates: {e}"))),
            None => Ok(PromptTemplates::builtin()),
        }
    }

    pub fn retrieval(&self, args: &RetrievalArgs) -> RetrievalConfig {
        let file = &self.file.retrieval;
        let mut config = RetrievalConfig::default();
        if let Some(v) = args.strategy.clone().or_else(|| file.strategy.clone()) {
            config.strategy = v;
        }
        if let Some(v) = args.pool.or(file.pool) {
            config.m = v;
        }
        if let Some(v) = args.k.or(file.k) {
            config.k = v;
        }
        if let Some(v) = args.s.or(file.s) {
            config.s = v;
        }
        if let Some(v) = args.mmr_lambda.or(file.mmr_lambda) {
            config.mmr_lambda = v;
        }
        config.raw_vs = args.raw_vs || file.raw_vs.unwrap_or(false);
        config
    }

    pub fn pipeline(&self, args: &PipelineArgs, retrieval: RetrievalConfig) -> PipelineConfig {
        let file = &self.file.pipeline;
        let defaults = PipelineConfig::default();
        PipelineConfig {
            s1: args.s1.or(file.s1).unwrap_or(defaults.s1),
            tau: args.tau.or(file.tau).unwrap_or(defaults.tau),
            max_iterations: args
                .max_iters
                .or(file.max_iterations)
                .unwrap_or(defaults.max_iterations),
            retrieval,
            s_schedule: args
                .schedule
                .or(file.schedule)
                .map(SSchedule::from)
                .unwrap_or(defaults.s_schedule),
            judge_enabled: !args.no_judge && file.judge.unwrap_or(true),
            strict_final_answer: args.strict_final || file.strict_final.unwrap_or(false),
            exclude_seen: args.exclude_seen || file.exclude_seen.unwrap_or(false),
        }
    }

    pub fn chunking(&self, max_tokens: Option<usize>, overlap: Option<usize>) -> (usize, usize) {
        (
            max_tokens
                .or(self.file.chunking.max_tokens)
                .unwrap_or(DEFAULT_MAX_TOKENS),
            overlap
                .or(self.file.chunking.overlap)
                .unwrap_or(DEFAULT_OVERLAP),
        )
    }

    pub fn jobs(&self, flag: Option<usize>) -> usize {
        flag.or(self.file.eval.jobs).unwrap_or(1)
    }

    pub fn sample(&self, flag: Option<usize>) -> Option<usize> {
        flag.or(self.file.eval.sample)
    }

    pub fn sample_seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.file.eval.seed).unwrap_or(DEFAULT_SAMPLE_SEED)
    }

    pub fn strict_acc(&self, flag: bool) -> bool {
        flag || self.file.eval.strict_acc.unwrap_or(false)
    }
}

// ── Effective-config echo ───────────────────────────────────────────────

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChunkingConfig {
    pub max_tokens: usize,
    pub overlap: usize,
}

/// The fully-resolved configuration embedded in every output artifact.
#[derive(Serialize)]
pub struct Effective<'a> {
    pub embedding: &'a EmbeddingProviderSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub llm: Option<&'a LlmProviderSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retrieval: Option<&'a RetrievalConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<&'a PipelineConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chunking: Option<ChunkingConfig>,
}

impl Effective<'_> {
    /// One debug line with the resolved configuration, so precedence
    /// can be inspected with RUST_LOG=debug without any output file.
    pub fn log(&self) {
        if let Ok(json) = serde_json::to_string(self) {
            log::debug!("effective config: {json}");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fingerprints_round_trip_through_the_parser() {
        let det = EmbeddingProviderSpec::deterministic(48, 11);
        match parse_fingerprint(&det.fingerprint()) {
            Some(Fingerprint::Deterministic { dim, seed }) => {
                assert_eq!(dim, 48);
                assert_eq!(seed, 11);
            }
            _ => panic!("deterministic fingerprint did not parse"),
        }
        let remote = EmbeddingProviderSpec::remote("http://x/v1", "org/model:v2", 768);
        match parse_fingerprint(&remote.fingerprint()) {
            Some(Fingerprint::Remote { model, dim }) => {
                assert_eq!(model, "org/model:v2");
                assert_eq!(dim, 768);
            }
            _ => panic!("remote fingerprint did not parse"),
        }
        assert!(parse_fingerprint("").is_none());
        assert!(parse_fingerprint("garbage").is_none());
    }

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vendi.toml");
        std::fs::write(
            &path,
            "[pipeline]\ns1 = 0.3\ntau = 0.6\n\n[retrieval]\nk = 3\n",
        )
        .unwrap();
        let resolver = Resolver::load(Some(&path)).unwrap();
        let retrieval = resolver.retrieval(&RetrievalArgs {
            k: Some(5),
            ..Default::default()
        });
        assert_eq!(retrieval.k, 5, "flag beats file");
        let pipeline = resolver.pipeline(
            &PipelineArgs {
                s1: Some(0.9),
                ..Default::default()
            },
            retrieval,
        );
        assert_eq!(pipeline.s1, 0.9, "flag beats file");
        assert_eq!(pipeline.tau, 0.6, "file beats default");
        assert_eq!(pipeline.max_iterations, 4, "default fills the rest");
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vendi.toml");
        std::fs::write(&path, "[pipeline]\nspeed = 11\n").unwrap();
        let err = Resolver::load(Some(&path)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("speed"));
    }

    #[test]
    fn scenario_flag_implies_a_scripted_provider() {
        let resolver = Resolver::load(None).unwrap();
        let spec = resolver
            .llm_spec(&LlmArgs {
                scenario: Some(PathBuf::from("s.json")),
                ..Default::default()
            })
            .unwrap();
        assert_eq!(spec.kind, vendi_core::llm::LlmKind::Scripted);
        assert_eq!(spec.scenario_path.as_deref(), Some(Path::new("s.json")));
    }

    #[test]
    fn missing_llm_configuration_is_a_usage_error() {
        let resolver = Resolver::load(None).unwrap();
        // The environment fallback must not be active for this test.
        if std::env::var(LLM_ENDPOINT_VAR).is_ok() {
            return;
        }
        let err = resolver.llm_spec(&LlmArgs::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn remote_embedder_without_endpoint_is_a_usage_error() {
        let resolver = Resolver::load(None).unwrap();
        let err = resolver
            .embedding_spec(&EmbeddingArgs {
                embedder: Some(EmbedderChoice::Remote),
                ..Default::default()
            })
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("--embed-endpoint"));
    }
}
