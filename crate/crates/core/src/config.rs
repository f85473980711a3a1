//! Experiment configuration: typed settings, backend specs and the
//! `key = value` config file loaded via the `CLIR_CONFIG` environment
//! variable. Every file key can be overridden by a CLI flag; the CLI wins.

use std::path::{Path, PathBuf};

use crate::bm25::Bm25Params;
use crate::corpus::{FieldMap, TaskKind};
use crate::error::{Error, Result};
use crate::expand::RefinementConfig;
use crate::prompt::DEFAULT_MAX_TOKENS;
use crate::translate::TranslationChain;

/// Which retrieval path an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Translation-augmented retrieval.
    Tl,
    /// Plain BM25 baseline.
    Bm25,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Tl => "tl",
            Mode::Bm25 => "bm25",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tl" => Ok(Mode::Tl),
            "bm25" => Ok(Mode::Bm25),
            other => Err(Error::Config(format!(
                "unknown mode `{other}` (expected `tl` or `bm25`)"
            ))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Translation backend selector: `identity`, `dict:<path>` or an HTTP base
/// URL (`http:<url>` or a bare `http(s)://...`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslatorSpec {
    Identity,
    Dict(PathBuf),
    Http(String),
}

impl TranslatorSpec {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "identity" {
            return Ok(TranslatorSpec::Identity);
        }
        if let Some(path) = s.strip_prefix("dict:") {
            return Ok(TranslatorSpec::Dict(PathBuf::from(path)));
        }
        if let Some(url) = parse_http_spec(s) {
            return Ok(TranslatorSpec::Http(url));
        }
        Err(Error::Config(format!(
            "unknown translator `{s}` (expected `identity`, `dict:<path>` or `http:<url>`)"
        )))
    }
}

/// LLM backend selector: `echo` or an HTTP base URL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LlmSpec {
    Echo,
    Http(String),
}

impl LlmSpec {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "echo" {
            return Ok(LlmSpec::Echo);
        }
        if let Some(url) = parse_http_spec(s) {
            return Ok(LlmSpec::Http(url));
        }
        Err(Error::Config(format!(
            "unknown llm `{s}` (expected `echo` or `http:<url>`)"
        )))
    }
}

/// Term-expander selector: `none` or `table:<path>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExpanderSpec {
    None,
    Table(PathBuf),
}

impl ExpanderSpec {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "none" {
            return Ok(ExpanderSpec::None);
        }
        if let Some(path) = s.strip_prefix("table:") {
            return Ok(ExpanderSpec::Table(PathBuf::from(path)));
        }
        Err(Error::Config(format!(
            "unknown expander `{s}` (expected `none` or `table:<path>`)"
        )))
    }
}

/// Accepts `http://...`, `https://...` and the prefixed `http:<url>` spec
/// form, normalizing to a full base URL.
fn parse_http_spec(s: &str) -> Option<String> {
    if s.starts_with("http://") || s.starts_with("https://") {
        return Some(s.to_string());
    }
    let rest = s.strip_prefix("http:")?;
    if rest.is_empty() {
        return None;
    }
    if rest.contains("://") {
        Some(rest.to_string())
    } else {
        Some(format!("http://{rest}"))
    }
}

/// A fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub task: TaskKind,
    pub field_map: FieldMap,
    pub mode: Mode,
    pub bm25: Bm25Params,
    pub top_k: usize,
    pub chain: String,
    pub translator: TranslatorSpec,
    pub expander: ExpanderSpec,
    pub llm: LlmSpec,
    pub max_iterations: usize,
    pub epsilon: f64,
    pub template: Option<PathBuf>,
    pub max_tokens: usize,
    pub prompt_doc_cap: Option<usize>,
    pub min_words: usize,
    pub min_profile_docs: usize,
    pub limit: Option<usize>,
    pub out: PathBuf,
    pub parallel: usize,
    /// Reserved for future stochastic backends; unused by the deterministic
    /// ones.
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    /// Minimal config with defaults for everything optional.
    pub fn new(
        dataset: impl Into<PathBuf>,
        task: TaskKind,
        mode: Mode,
        out: impl Into<PathBuf>,
    ) -> Self {
        ExperimentConfig {
            dataset: dataset.into(),
            field_map: FieldMap::for_task(task),
            task,
            mode,
            bm25: Bm25Params::default(),
            top_k: 2,
            chain: "en-es-en".to_string(),
            translator: TranslatorSpec::Identity,
            expander: ExpanderSpec::None,
            llm: LlmSpec::Echo,
            max_iterations: 3,
            epsilon: 1e-9,
            template: None,
            max_tokens: DEFAULT_MAX_TOKENS,
            prompt_doc_cap: None,
            min_words: 10,
            min_profile_docs: 10,
            limit: None,
            out: out.into(),
            parallel: 1,
            seed: None,
        }
    }

    /// The refinement settings implied by this config.
    pub fn refinement(&self) -> RefinementConfig {
        RefinementConfig {
            max_iterations: self.max_iterations,
            epsilon: self.epsilon,
            top_k: self.top_k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.bm25.validate()?;
        self.refinement().validate()?;
        TranslationChain::parse(&self.chain)?;
        if self.max_tokens < 1 {
            return Err(Error::Config("max_tokens must be >= 1".to_string()));
        }
        if self.parallel < 1 {
            return Err(Error::Config("parallel must be >= 1".to_string()));
        }
        Ok(())
    }
}

/// Accumulates settings from the config file and CLI flags before building
/// an [`ExperimentConfig`]. Later assignments win, so apply the file first
/// and the CLI second.
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    pub dataset: Option<PathBuf>,
    pub task: Option<TaskKind>,
    pub mode: Option<Mode>,
    pub chain: Option<String>,
    pub translator: Option<TranslatorSpec>,
    pub expander: Option<ExpanderSpec>,
    pub llm: Option<LlmSpec>,
    pub top_k: Option<usize>,
    pub max_iterations: Option<usize>,
    pub epsilon: Option<f64>,
    pub k1: Option<f64>,
    pub b: Option<f64>,
    pub max_tokens: Option<usize>,
    pub template: Option<PathBuf>,
    pub prompt_doc_cap: Option<usize>,
    pub min_words: Option<usize>,
    pub min_profile_docs: Option<usize>,
    pub limit: Option<usize>,
    pub out: Option<PathBuf>,
    pub parallel: Option<usize>,
    pub seed: Option<u64>,
    pub field_id: Option<String>,
    pub field_input: Option<String>,
    pub field_profile: Option<String>,
    pub field_profile_text: Option<String>,
    pub field_output: Option<String>,
}

impl ConfigBuilder {
    /// Apply `key = value` lines from a config file. Blank lines and lines
    /// starting with `#` are skipped; unknown keys are errors.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (lineno, line) in raw.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    lineno + 1
                ))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        }
        Ok(())
    }

    /// Set one key from its string form. Shared by the file parser; the CLI
    /// assigns the typed fields directly.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dataset" => self.dataset = Some(PathBuf::from(value)),
            "task" => self.task = Some(TaskKind::parse(value)?),
            "mode" => self.mode = Some(Mode::parse(value)?),
            "chain" => self.chain = Some(value.to_string()),
            "translator" => self.translator = Some(TranslatorSpec::parse(value)?),
            "expander" => self.expander = Some(ExpanderSpec::parse(value)?),
            "llm" => self.llm = Some(LlmSpec::parse(value)?),
            "top_k" => self.top_k = Some(parse_num(key, value)?),
            "max_iters" => self.max_iterations = Some(parse_num(key, value)?),
            "epsilon" => self.epsilon = Some(parse_num(key, value)?),
            "k1" => self.k1 = Some(parse_num(key, value)?),
            "b" => self.b = Some(parse_num(key, value)?),
            "max_tokens" => self.max_tokens = Some(parse_num(key, value)?),
            "template" => self.template = Some(PathBuf::from(value)),
            "prompt_doc_cap" => self.prompt_doc_cap = Some(parse_num(key, value)?),
            "min_words" => self.min_words = Some(parse_num(key, value)?),
            "min_profile_docs" => self.min_profile_docs = Some(parse_num(key, value)?),
            "limit" => self.limit = Some(parse_num(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "parallel" => self.parallel = Some(parse_num(key, value)?),
            "seed" => self.seed = Some(parse_num(key, value)?),
            "field_id" => self.field_id = Some(value.to_string()),
            "field_input" => self.field_input = Some(value.to_string()),
            "field_profile" => self.field_profile = Some(value.to_string()),
            "field_profile_text" => self.field_profile_text = Some(value.to_string()),
            "field_output" => self.field_output = Some(value.to_string()),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Build and validate the final config. `dataset`, `task`, `mode` and
    /// `out` are required; everything else has a default.
    pub fn build(self) -> Result<ExperimentConfig> {
        let mut missing = Vec::new();
        if self.dataset.is_none() {
            missing.push("dataset");
        }
        if self.task.is_none() {
            missing.push("task");
        }
        if self.mode.is_none() {
            missing.push("mode");
        }
        if self.out.is_none() {
            missing.push("out");
        }
        if !missing.is_empty() {
            return Err(Error::Config(format!(
                "missing required setting(s): {}",
                missing.join(", ")
            )));
        }

        let task = self.task.unwrap();
        let mut cfg = ExperimentConfig::new(
            self.dataset.unwrap(),
            task,
            self.mode.unwrap(),
            self.out.unwrap(),
        );

        if let Some(v) = self.chain {
            cfg.chain = v;
        }
        if let Some(v) = self.translator {
            cfg.translator = v;
        }
        if let Some(v) = self.expander {
            cfg.expander = v;
        }
        if let Some(v) = self.llm {
            cfg.llm = v;
        }
        if let Some(v) = self.top_k {
            cfg.top_k = v;
        }
        if let Some(v) = self.max_iterations {
            cfg.max_iterations = v;
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = self.k1 {
            cfg.bm25.k1 = v;
        }
        if let Some(v) = self.b {
            cfg.bm25.b = v;
        }
        if let Some(v) = self.max_tokens {
            cfg.max_tokens = v;
        }
        cfg.template = self.template;
        cfg.prompt_doc_cap = self.prompt_doc_cap;
        if let Some(v) = self.min_words {
            cfg.min_words = v;
        }
        if let Some(v) = self.min_profile_docs {
            cfg.min_profile_docs = v;
        }
        cfg.limit = self.limit;
        if let Some(v) = self.parallel {
            cfg.parallel = v;
        }
        cfg.seed = self.seed;

        if let Some(v) = self.field_id {
            cfg.field_map.id = v;
        }
        if let Some(v) = self.field_input {
            cfg.field_map.input = v;
        }
        if let Some(v) = self.field_profile {
            cfg.field_map.profile = v;
        }
        if let Some(v) = self.field_profile_text {
            cfg.field_map.profile_text = v;
        }
        if let Some(v) = self.field_output {
            cfg.field_map.output = v;
        }

        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("invalid value for `{key}`: {e}")))
}
