//! Okapi BM25 inverted index over a single user profile.
//!
//! The variant used here puts the `+1` inside the IDF logarithm,
//! `ln(1 + (N - df + 0.5) / (df + 0.5))`, so scores never go negative even
//! on tiny profiles where `df` approaches `N`. Duplicate query terms are
//! counted once, zero-score documents are dropped, and ties are broken by
//! doc id ascending so retrieval is deterministic.

use std::collections::{HashMap, HashSet};

use crate::corpus::Document;
use crate::error::{Error, Result};

/// BM25 free parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    /// Term-frequency saturation, `k1 >= 0`.
    pub k1: f64,
    /// Document-length normalization, `0 <= b <= 1`.
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.5, b: 0.75 }
    }
}

impl Bm25Params {
    /// Check the parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if !self.k1.is_finite() || self.k1 < 0.0 {
            return Err(Error::Config(format!("k1 must be >= 0, got {}", self.k1)));
        }
        if !self.b.is_finite() || !(0.0..=1.0).contains(&self.b) {
            return Err(Error::Config(format!(
                "b must be in [0, 1], got {}",
                self.b
            )));
        }
        Ok(())
    }
}

/// A retrieved document with its positive BM25 score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub score: f64,
}

/// Immutable inverted index over one profile's documents.
#[derive(Debug, Clone)]
pub struct Bm25Index {
    /// term -> [(doc_id, term frequency)], in insertion order.
    postings: HashMap<String, Vec<(String, u32)>>,
    doc_len: HashMap<String, usize>,
    avgdl: f64,
    n_docs: usize,
    params: Bm25Params,
}

impl Bm25Index {
    /// Build an index over the documents' cached tokens.
    ///
    /// Fails on an empty document list or a duplicate document id.
    pub fn build(docs: &[Document], params: Bm25Params) -> Result<Self> {
        params.validate()?;
        if docs.is_empty() {
            return Err(Error::Usage(
                "cannot build an index over zero documents".to_string(),
            ));
        }

        let mut postings: HashMap<String, Vec<(String, u32)>> = HashMap::new();
        let mut doc_len = HashMap::with_capacity(docs.len());
        let mut total_len = 0usize;

        for doc in docs {
            if doc_len
                .insert(doc.id().to_string(), doc.tokens().len())
                .is_some()
            {
                return Err(Error::Usage(format!(
                    "duplicate document id `{}`",
                    doc.id()
                )));
            }
            total_len += doc.tokens().len();

            let mut freq: HashMap<&str, u32> = HashMap::new();
            for tok in doc.tokens() {
                *freq.entry(tok.as_str()).or_insert(0) += 1;
            }
            for (term, tf) in freq {
                postings
                    .entry(term.to_string())
                    .or_default()
                    .push((doc.id().to_string(), tf));
            }
        }

        Ok(Bm25Index {
            postings,
            doc_len,
            avgdl: total_len as f64 / docs.len() as f64,
            n_docs: docs.len(),
            params,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    /// Token count of an indexed document.
    pub fn doc_len(&self, doc_id: &str) -> Option<usize> {
        self.doc_len.get(doc_id).copied()
    }

    /// Number of documents containing `term`.
    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    /// `term`'s frequency in the given document.
    pub fn term_freq(&self, term: &str, doc_id: &str) -> u32 {
        self.postings
            .get(term)
            .and_then(|list| list.iter().find(|(id, _)| id == doc_id))
            .map_or(0, |(_, tf)| *tf)
    }

    fn idf(&self, df: usize) -> f64 {
        let n = self.n_docs as f64;
        let df = df as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    fn term_weight(&self, tf: u32, dl: usize) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let tf = tf as f64;
        let norm = 1.0 - b + b * dl as f64 / self.avgdl;
        tf * (k1 + 1.0) / (tf + k1 * norm)
    }

    /// BM25 score of one document for a query, duplicate query terms counted
    /// once. Terms absent from the document (or the corpus) contribute zero.
    pub fn score(&self, query_tokens: &[String], doc_id: &str) -> Result<f64> {
        let dl = self
            .doc_len
            .get(doc_id)
            .copied()
            .ok_or_else(|| Error::Usage(format!("unknown document id `{doc_id}`")))?;

        let mut seen = HashSet::new();
        let mut total = 0.0;
        for term in query_tokens {
            if !seen.insert(term.as_str()) {
                continue;
            }
            let Some(list) = self.postings.get(term.as_str()) else {
                continue;
            };
            let Some((_, tf)) = list.iter().find(|(id, _)| id == doc_id) else {
                continue;
            };
            total += self.idf(list.len()) * self.term_weight(*tf, dl);
        }
        Ok(total)
    }

    /// Top-`k` documents with positive score, sorted by score descending and
    /// doc id ascending on ties. Deterministic; an empty result is valid.
    pub fn retrieve(&self, query_tokens: &[String], k: usize) -> Vec<ScoredDoc> {
        let mut seen = HashSet::new();
        let mut acc: HashMap<&str, f64> = HashMap::new();

        for term in query_tokens {
            if !seen.insert(term.as_str()) {
                continue;
            }
            let Some(list) = self.postings.get(term.as_str()) else {
                continue;
            };
            let idf = self.idf(list.len());
            for (doc_id, tf) in list {
                let dl = self.doc_len[doc_id.as_str()];
                *acc.entry(doc_id.as_str()).or_insert(0.0) += idf * self.term_weight(*tf, dl);
            }
        }

        let mut scored: Vec<ScoredDoc> = acc
            .into_iter()
            .filter(|(_, score)| *score > 0.0)
            .map(|(doc_id, score)| ScoredDoc {
                doc_id: doc_id.to_string(),
                score,
            })
            .collect();
        scored.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .expect("bm25 scores are finite")
                .then_with(|| a.doc_id.cmp(&b.doc_id))
        });
        scored.truncate(k);
        scored
    }
}
