//! Query expansion via round-trip translation, merged retrieval and the
//! iterative refinement loop.
//!
//! An expanded query keeps the original text, a translation-derived variant
//! and the deduplicated token union of both. The refinement loop deepens the
//! translation by one more round-trip pass per iteration and keeps the
//! retrieval whose score sum is highest; with the identity backend the whole
//! machinery degenerates to plain BM25 retrieval.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::bm25::{Bm25Index, ScoredDoc};
use crate::corpus::{Sample, tokenize};
use crate::error::{Error, Result};
use crate::translate::{TranslationChain, Translator, round_trip};

/// Similar terms requested per original query token when an expander is
/// configured.
const SIMILAR_TERMS_PER_TOKEN: usize = 3;

/// A query widened with translation variants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandedQuery {
    /// The text the expansion started from.
    pub original_text: String,
    /// Variant texts; the first is the round-trip translation.
    pub variant_texts: Vec<String>,
    /// Deduplicated token union: the original's tokens first, then new
    /// tokens in first-seen order.
    pub all_tokens: Vec<String>,
}

/// Settings for the refinement loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementConfig {
    /// Maximum loop retrievals, `>= 1`.
    pub max_iterations: usize,
    /// Minimum score-sum improvement to keep iterating, `> 0`.
    pub epsilon: f64,
    /// Documents retrieved per stage, `>= 1`.
    pub top_k: usize,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        RefinementConfig {
            max_iterations: 3,
            epsilon: 1e-9,
            top_k: 2,
        }
    }
}

impl RefinementConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::Config("max_iterations must be >= 1".to_string()));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::Config(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if self.top_k < 1 {
            return Err(Error::Config("top_k must be >= 1".to_string()));
        }
        Ok(())
    }
}

/// Pluggable similar-term lookup. Implementations must be deterministic and
/// return at most `k` nonempty lowercase terms.
pub trait TermExpander: Send + Sync {
    fn similar_terms(&self, term: &str, k: usize) -> Vec<String>;
}

/// Static-table expander backed by a JSON file of the form
/// `{"gun": ["firearm", "pistol"]}`.
#[derive(Debug, Clone, Default)]
pub struct TableExpander {
    table: HashMap<String, Vec<String>>,
}

impl TableExpander {
    pub fn new(table: HashMap<String, Vec<String>>) -> Self {
        TableExpander { table }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let table: HashMap<String, Vec<String>> =
            serde_json::from_str(&raw).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        Ok(TableExpander { table })
    }
}

impl TermExpander for TableExpander {
    fn similar_terms(&self, term: &str, k: usize) -> Vec<String> {
        self.table
            .get(term)
            .map(|terms| terms.iter().take(k).cloned().collect())
            .unwrap_or_default()
    }
}

/// Expand a query with one round-trip translation variant plus, when an
/// expander is present, similar terms for each original token.
///
/// A translation failure does not fail the expansion: the variant falls back
/// to the original text and a warning is recorded, so the pipeline proceeds
/// baseline-equivalent.
pub fn expand_query(
    q_text: &str,
    translator: &dyn Translator,
    chain: &TranslationChain,
    expander: Option<&dyn TermExpander>,
    warnings: &mut Vec<String>,
) -> ExpandedQuery {
    match try_expand(q_text, translator, chain, expander) {
        Ok(eq) => eq,
        Err(e) => {
            warnings.push(format!(
                "query expansion fell back to the original text: {e}"
            ));
            assemble(q_text, q_text.to_string(), expander)
        }
    }
}

/// Like [`expand_query`] but surfaces the translation failure instead of
/// falling back. The refinement loop uses this to stop deepening.
fn try_expand(
    q_text: &str,
    translator: &dyn Translator,
    chain: &TranslationChain,
    expander: Option<&dyn TermExpander>,
) -> Result<ExpandedQuery> {
    let variant = round_trip(translator, q_text, chain)?;
    Ok(assemble(q_text, variant, expander))
}

fn assemble(q_text: &str, variant: String, expander: Option<&dyn TermExpander>) -> ExpandedQuery {
    let original_tokens = tokenize(q_text);
    let mut seen: HashSet<String> = HashSet::new();
    let mut all_tokens = Vec::new();

    for tok in &original_tokens {
        if seen.insert(tok.clone()) {
            all_tokens.push(tok.clone());
        }
    }
    for tok in tokenize(&variant) {
        if seen.insert(tok.clone()) {
            all_tokens.push(tok);
        }
    }
    if let Some(exp) = expander {
        for tok in &original_tokens {
            for term in exp.similar_terms(tok, SIMILAR_TERMS_PER_TOKEN) {
                if seen.insert(term.clone()) {
                    all_tokens.push(term);
                }
            }
        }
    }

    ExpandedQuery {
        original_text: q_text.to_string(),
        variant_texts: vec![variant],
        all_tokens,
    }
}

/// Merge two ranked retrievals into a deduplicated id list: all of `primary`
/// in order, then the ids of `secondary` not already present, in order.
pub fn merge_retrievals(primary: &[ScoredDoc], secondary: &[ScoredDoc]) -> Vec<String> {
    let mut seen: HashSet<&str> = HashSet::new();
    let mut merged = Vec::new();
    for doc in primary.iter().chain(secondary) {
        if seen.insert(doc.doc_id.as_str()) {
            merged.push(doc.doc_id.clone());
        }
    }
    merged
}

/// Outcome of the refinement loop.
#[derive(Debug, Clone, PartialEq)]
pub struct RefineResult {
    /// The best iteration's retrieval (highest score sum, earliest iteration
    /// on ties).
    pub docs: Vec<ScoredDoc>,
    /// Loop retrievals performed; at most `max_iterations`.
    pub iterations: usize,
}

fn score_sum(docs: &[ScoredDoc]) -> f64 {
    docs.iter().map(|d| d.score).sum()
}

/// Iteratively deepen the translation and re-retrieve until the score sum
/// stops improving by more than epsilon or the iteration bound is reached.
///
/// Iteration 0 retrieves with the expansion of `q_text`; iteration `i`
/// expands the previous iteration's first variant text, which applies one
/// more round-trip pass. A translation failure mid-loop ends the loop with
/// the best result so far.
pub fn refine_loop(
    index: &Bm25Index,
    q_text: &str,
    translator: &dyn Translator,
    chain: &TranslationChain,
    expander: Option<&dyn TermExpander>,
    cfg: &RefinementConfig,
    warnings: &mut Vec<String>,
) -> RefineResult {
    let initial = expand_query(q_text, translator, chain, expander, warnings);
    let docs = index.retrieve(&initial.all_tokens, cfg.top_k);
    let mut prev_metric = score_sum(&docs);
    let mut prev_variant = initial.variant_texts[0].clone();
    let mut best_metric = prev_metric;
    let mut best_docs = docs;
    let mut iterations = 1;

    while iterations < cfg.max_iterations {
        let expanded = match try_expand(&prev_variant, translator, chain, expander) {
            Ok(eq) => eq,
            Err(e) => {
                warnings.push(format!("refinement stopped early: {e}"));
                break;
            }
        };
        let docs = index.retrieve(&expanded.all_tokens, cfg.top_k);
        let metric = score_sum(&docs);
        iterations += 1;

        if metric > best_metric {
            best_metric = metric;
            best_docs = docs;
        }
        let improved = metric > prev_metric + cfg.epsilon;
        prev_metric = metric;
        prev_variant = expanded.variant_texts[0].clone();
        if !improved {
            break;
        }
    }

    RefineResult {
        docs: best_docs,
        iterations,
    }
}

/// Result of translation-augmented retrieval for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TlRetrieval {
    /// Baseline ids in rank order followed by newly found ids.
    pub doc_ids: Vec<String>,
    /// Refinement-loop retrievals performed.
    pub iterations: usize,
}

/// Translation-augmented retrieval: the plain BM25 baseline for the sample's
/// input text merged with the refinement loop's best retrieval.
///
/// Translation failures degrade to the baseline rather than propagate.
pub fn retrieve_tl(
    sample: &Sample,
    index: &Bm25Index,
    translator: &dyn Translator,
    chain: &TranslationChain,
    expander: Option<&dyn TermExpander>,
    cfg: &RefinementConfig,
    warnings: &mut Vec<String>,
) -> TlRetrieval {
    let baseline = index.retrieve(&tokenize(&sample.input_text), cfg.top_k);
    let refined = refine_loop(
        index,
        &sample.input_text,
        translator,
        chain,
        expander,
        cfg,
        warnings,
    );
    TlRetrieval {
        doc_ids: merge_retrievals(&baseline, &refined.docs),
        iterations: refined.iterations,
    }
}
