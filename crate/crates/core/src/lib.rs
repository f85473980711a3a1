//! Personalized cross-language retrieval experiment engine.
//!
//! The pipeline retrieves documents from a per-user profile with Okapi BM25,
//! widens the query through round-trip translation over a language chain
//! (optionally plus a pluggable similar-term expander), iteratively refines
//! the retrieval, builds a personalized rephrasing prompt for an LLM backend
//! and scores the generated text against references with ROUGE-1/ROUGE-L.
//! Two modes share the machinery: `tl` (translation-augmented) and `bm25`
//! (plain baseline), so their reports are directly comparable.
//!
//! Translation and generation are external services behind the
//! [`translate::Translator`] and [`prompt::LlmClient`] traits; the bundled
//! dictionary, identity and echo backends keep everything deterministic and
//! offline for tests and CI.

pub mod bm25;
pub mod config;
pub mod corpus;
pub mod error;
pub mod expand;
mod http;
pub mod pipeline;
pub mod prompt;
pub mod rouge;
pub mod translate;

pub use bm25::{Bm25Index, Bm25Params, ScoredDoc};
pub use config::{ConfigBuilder, ExpanderSpec, ExperimentConfig, LlmSpec, Mode, TranslatorSpec};
pub use corpus::{
    Dataset, Document, FieldMap, Sample, TaskKind, UserProfile, filter_tweet_dataset, load_dataset,
    save_dataset, tokenize,
};
pub use error::{Error, Result};
pub use expand::{
    ExpandedQuery, RefineResult, RefinementConfig, TableExpander, TermExpander, TlRetrieval,
    expand_query, merge_retrievals, refine_loop, retrieve_tl,
};
pub use http::HttpConfig;
pub use pipeline::{
    Experiment, ExperimentResult, ReportRow, emit_report, render_report, run_experiment,
};
pub use prompt::{EchoLlm, HttpLlm, LlmClient, PromptTemplate, build_prompt, generate_output};
pub use rouge::{RougeScore, aggregate, rouge_1, rouge_l};
pub use translate::{
    DictionaryTranslator, HttpTranslator, IdentityTranslator, LangCode, TranslationChain,
    Translator, round_trip,
};
