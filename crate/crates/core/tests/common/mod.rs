//! Shared fixtures for the integration and acceptance suites: a tiny
//! deterministic generator, synthetic datasets and the synonym fixture whose
//! relevant documents are reachable only through dictionary translation.
//!
//! Each test target compiles this module separately and uses a subset of it.
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use clir_core::{
    Bm25Params, Dataset, DictionaryTranslator, Document, EchoLlm, Experiment, Mode, PromptTemplate,
    RefinementConfig, Sample, TaskKind, TranslationChain, UserProfile,
};

/// Minimal 64-bit LCG so randomized trials are reproducible without pulling
/// a crate into the test profile.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg(seed
            .wrapping_mul(2862933555777941757)
            .wrapping_add(3037000493))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0
    }

    /// Uniform draw in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() >> 33) as usize) % n
    }
}

pub const VOCAB: [&str; 24] = [
    "river", "stone", "maple", "cloud", "ember", "frost", "gull", "harbor", "iris", "jade", "kelp",
    "lantern", "moss", "north", "orchid", "pine", "quartz", "reef", "slate", "tide", "umber",
    "vale", "willow", "yarrow",
];

pub fn words(rng: &mut Lcg, n: usize) -> String {
    (0..n)
        .map(|_| VOCAB[rng.below(VOCAB.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

/// A synthetic dataset: every sample has a profile of 5..=9 documents drawn
/// from the shared vocabulary, an input of 3..=6 words and a reference that
/// overlaps the input.
pub fn synthetic_dataset(n_samples: usize, seed: u64) -> Dataset {
    let mut rng = Lcg::new(seed);
    let samples = (0..n_samples)
        .map(|i| {
            let n_docs = 5 + rng.below(5);
            let documents = (0..n_docs)
                .map(|d| {
                    let len = 3 + rng.below(6);
                    Document::new(format!("d{d:02}"), None, words(&mut rng, len))
                })
                .collect();
            let input_len = 3 + rng.below(4);
            let input = words(&mut rng, input_len);
            let reference = format!("{} {}", input, words(&mut rng, 2));
            Sample {
                id: format!("s{i:03}"),
                input_text: input,
                profile: UserProfile {
                    user_id: format!("u{i:03}"),
                    documents,
                },
                reference_output: reference,
            }
        })
        .collect();
    Dataset {
        task: TaskKind::NewsHeadline,
        samples,
    }
}

/// Dictionary whose en-es-en round trip maps "gun" to "weapon".
pub fn gun_dictionary() -> DictionaryTranslator {
    let mut en_es = HashMap::new();
    en_es.insert("gun".to_string(), "arma".to_string());
    let mut es_en = HashMap::new();
    es_en.insert("arma".to_string(), "weapon".to_string());
    let mut maps = HashMap::new();
    maps.insert("en-es".to_string(), en_es);
    maps.insert("es-en".to_string(), es_en);
    DictionaryTranslator::new(maps)
}

/// The same dictionary as a JSON string for on-disk fixtures.
pub fn gun_dictionary_json() -> &'static str {
    r#"{"en-es": {"gun": "arma"}, "es-en": {"arma": "weapon"}}"#
}

/// Ids of the samples whose relevant document is reachable only through the
/// translated vocabulary.
pub const SYNONYM_SAMPLE_IDS: [&str; 5] = ["syn00", "syn01", "syn02", "syn03", "syn04"];

/// Twenty samples; for the five `syn*` samples the query shares no token
/// with the profile, and only the dictionary round trip ("gun" -> "weapon")
/// reaches the relevant document. The rest behave identically under both
/// modes.
pub fn synonym_fixture() -> Dataset {
    let mut samples = Vec::new();

    for i in 0..5 {
        let input = format!("gun {} {}", VOCAB[i], VOCAB[i + 6]);
        let documents = vec![
            Document::new("rel", None, "weapon drills weapon range"),
            Document::new("off1", None, "cooking pasta tonight"),
            Document::new("off2", None, "sunny garden flowers"),
        ];
        samples.push(Sample {
            id: format!("syn{i:02}"),
            input_text: input.clone(),
            profile: UserProfile {
                user_id: format!("syn{i:02}"),
                documents,
            },
            reference_output: input,
        });
    }

    let mut rng = Lcg::new(99);
    for i in 0..15 {
        let shared = words(&mut rng, 3);
        let input = format!("{shared} {}", VOCAB[rng.below(VOCAB.len())]);
        let documents = vec![
            Document::new("hit", None, shared.clone()),
            Document::new("off1", None, "cooking pasta tonight"),
            Document::new("off2", None, "sunny garden flowers"),
        ];
        samples.push(Sample {
            id: format!("reg{i:02}"),
            input_text: input.clone(),
            profile: UserProfile {
                user_id: format!("reg{i:02}"),
                documents,
            },
            reference_output: input,
        });
    }

    // The synonym samples must share no vocabulary with the regular pool.
    for s in &samples[..5] {
        assert!(!s.input_text.contains("weapon"));
    }

    Dataset {
        task: TaskKind::NewsHeadline,
        samples,
    }
}

/// An in-memory experiment with the given mode and backends; everything else
/// is the default configuration.
pub fn experiment(
    mode: Mode,
    translator: Arc<dyn clir_core::Translator>,
    task: TaskKind,
) -> Experiment {
    let template = PromptTemplate::for_task(task);
    Experiment {
        mode,
        chain: TranslationChain::parse("en-es-en").unwrap(),
        bm25: Bm25Params::default(),
        refinement: RefinementConfig::default(),
        template: template.clone(),
        max_tokens: 64,
        prompt_doc_cap: None,
        parallel: 1,
        translator,
        expander: None,
        llm: Arc::new(EchoLlm::new(template)),
    }
}
