//! ROUGE-1 and ROUGE-L with precision/recall/F1, plus macro aggregation.
//!
//! ROUGE-1 uses clipped unigram counts; ROUGE-L normalizes the longest
//! common subsequence length by hypothesis length (precision) and reference
//! length (recall). F1 is the plain harmonic mean (beta = 1) and every
//! empty-input case yields zeros rather than dividing by zero.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A precision/recall/F1 triple, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    /// Combine precision and recall; F1 is 0 when both are 0.
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        RougeScore {
            precision,
            recall,
            f1,
        }
    }
}

fn counts(tokens: &[String]) -> HashMap<&str, usize> {
    let mut map = HashMap::new();
    for tok in tokens {
        *map.entry(tok.as_str()).or_insert(0) += 1;
    }
    map
}

/// Unigram-overlap score with clipped counts.
pub fn rouge_1(hyp_tokens: &[String], ref_tokens: &[String]) -> RougeScore {
    if hyp_tokens.is_empty() || ref_tokens.is_empty() {
        return RougeScore::default();
    }
    let hyp_counts = counts(hyp_tokens);
    let ref_counts = counts(ref_tokens);
    let overlap: usize = hyp_counts
        .iter()
        .map(|(tok, n)| n.min(ref_counts.get(tok).unwrap_or(&0)))
        .sum();
    RougeScore::from_pr(
        overlap as f64 / hyp_tokens.len() as f64,
        overlap as f64 / ref_tokens.len() as f64,
    )
}

fn lcs_length(a: &[String], b: &[String]) -> usize {
    // Rolling single-row DP.
    let mut row = vec![0usize; b.len() + 1];
    for a_tok in a {
        let mut diag = 0;
        for (j, b_tok) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if a_tok == b_tok {
                diag + 1
            } else {
                above.max(row[j])
            };
            diag = above;
        }
    }
    row[b.len()]
}

/// Longest-common-subsequence score over single token sequences.
pub fn rouge_l(hyp_tokens: &[String], ref_tokens: &[String]) -> RougeScore {
    if hyp_tokens.is_empty() || ref_tokens.is_empty() {
        return RougeScore::default();
    }
    let lcs = lcs_length(hyp_tokens, ref_tokens) as f64;
    RougeScore::from_pr(lcs / hyp_tokens.len() as f64, lcs / ref_tokens.len() as f64)
}

/// Macro average: the arithmetic mean of precision, recall and F1 taken
/// independently. The averaged F1 is deliberately not recomputed from the
/// averaged precision and recall.
pub fn aggregate(scores: &[RougeScore]) -> Result<RougeScore> {
    if scores.is_empty() {
        return Err(Error::Usage("cannot aggregate zero scores".to_string()));
    }
    let n = scores.len() as f64;
    Ok(RougeScore {
        precision: scores.iter().map(|s| s.precision).sum::<f64>() / n,
        recall: scores.iter().map(|s| s.recall).sum::<f64>() / n,
        f1: scores.iter().map(|s| s.f1).sum::<f64>() / n,
    })
}
