//! Pipeline-level behaviors that need whole experiments: per-sample failure
//! isolation, mode symmetry, on-disk round trips and report shape.

mod common;

use std::sync::Arc;

use clir_core::{
    EchoLlm, Error, ExperimentConfig, FieldMap, IdentityTranslator, LlmClient, LlmSpec, Mode,
    PromptTemplate, TaskKind, TranslatorSpec,
};
use common::{experiment, gun_dictionary, synonym_fixture, synthetic_dataset};

/// Echo client that fails whenever the prompt contains a marker string.
struct FailOnMarker {
    marker: String,
    inner: EchoLlm,
}

impl LlmClient for FailOnMarker {
    fn generate(&self, prompt: &str, max_tokens: usize) -> clir_core::Result<String> {
        if prompt.contains(&self.marker) {
            return Err(Error::Generation("injected failure".to_string()));
        }
        self.inner.generate(prompt, max_tokens)
    }
}

#[test]
fn injected_failure_is_isolated_to_its_sample() {
    let dataset = synthetic_dataset(8, 7);
    let victim = dataset.samples[3].input_text.clone();

    let clean = experiment(Mode::Tl, Arc::new(IdentityTranslator), dataset.task)
        .run(&dataset)
        .unwrap();

    let mut faulty = experiment(Mode::Tl, Arc::new(IdentityTranslator), dataset.task);
    faulty.llm = Arc::new(FailOnMarker {
        marker: victim,
        inner: EchoLlm::new(PromptTemplate::for_task(dataset.task)),
    });
    let faulty = faulty.run(&dataset).unwrap();

    let mut failures = 0;
    for (c, f) in clean.rows.iter().zip(&faulty.rows) {
        if f.warnings.iter().any(|w| w.contains("injected failure")) {
            failures += 1;
            assert_eq!(f.generated_text, "");
            assert_eq!(f.rouge1, clir_core::RougeScore::default());
        } else {
            assert_eq!(c, f, "unaffected row changed: {}", c.sample_id);
        }
    }
    assert_eq!(failures, 1);
}

#[test]
fn identity_backends_make_modes_symmetric() {
    let dataset = synthetic_dataset(20, 11);
    let tl = experiment(Mode::Tl, Arc::new(IdentityTranslator), dataset.task)
        .run(&dataset)
        .unwrap();
    let bm = experiment(Mode::Bm25, Arc::new(IdentityTranslator), dataset.task)
        .run(&dataset)
        .unwrap();
    assert_eq!(tl.rouge1, bm.rouge1);
    assert_eq!(tl.rouge_l, bm.rouge_l);
}

#[test]
fn experiment_runs_from_disk_with_dictionary_translator() {
    let dir = tempfile::tempdir().unwrap();
    let dataset_path = dir.path().join("dataset.json");
    let dict_path = dir.path().join("dict.json");
    let out_path = dir.path().join("report.csv");
    std::fs::write(&dict_path, common::gun_dictionary_json()).unwrap();

    let dataset = synonym_fixture();
    let map = FieldMap::for_task(dataset.task);
    clir_core::save_dataset(&dataset, &map, &dataset_path).unwrap();

    let mut cfg = ExperimentConfig::new(&dataset_path, dataset.task, Mode::Tl, &out_path);
    cfg.translator = TranslatorSpec::Dict(dict_path);
    cfg.llm = LlmSpec::Echo;
    cfg.parallel = 3;

    let result = clir_core::run_experiment(&cfg).unwrap();
    assert_eq!(result.rows.len(), 20);
    clir_core::emit_report(&result, &cfg.out).unwrap();

    let text = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 22);
    assert!(lines[0].starts_with("sample_id,mode,"));
    assert!(lines[21].starts_with("AGGREGATE,tl,"));

    // Rows are sorted by sample id and every syn* row found the translated
    // document.
    let mut ids: Vec<&str> = Vec::new();
    for line in &lines[1..21] {
        ids.push(line.split(',').next().unwrap());
    }
    let mut sorted = ids.clone();
    sorted.sort_unstable();
    assert_eq!(ids, sorted);
    for line in lines[1..21].iter().filter(|l| l.starts_with("syn")) {
        assert!(line.contains("rel"), "{line}");
    }
}

#[test]
fn limit_caps_the_sample_count() {
    let dir = tempfile::tempdir().unwrap();
    let dataset_path = dir.path().join("dataset.json");
    let dataset = synthetic_dataset(9, 3);
    let map = FieldMap::for_task(dataset.task);
    clir_core::save_dataset(&dataset, &map, &dataset_path).unwrap();

    let mut cfg = ExperimentConfig::new(
        &dataset_path,
        dataset.task,
        Mode::Bm25,
        dir.path().join("r.csv"),
    );
    cfg.limit = Some(4);
    let result = clir_core::run_experiment(&cfg).unwrap();
    assert_eq!(result.rows.len(), 4);
}

#[test]
fn empty_dataset_is_a_startup_error() {
    let dir = tempfile::tempdir().unwrap();
    let dataset_path = dir.path().join("dataset.json");
    std::fs::write(&dataset_path, "[]").unwrap();

    let cfg = ExperimentConfig::new(
        &dataset_path,
        TaskKind::NewsHeadline,
        Mode::Bm25,
        dir.path().join("r.csv"),
    );
    assert!(matches!(
        clir_core::run_experiment(&cfg),
        Err(Error::Config(_))
    ));
}

#[test]
fn tweet_task_applies_the_filter() {
    use clir_core::{Dataset, Document, Sample, UserProfile};

    let long_input = "one two three four five six seven eight nine ten";
    let docs = |n: usize| -> Vec<Document> {
        (0..n)
            .map(|i| Document::new(format!("d{i}"), None, format!("tweet text number {i}")))
            .collect()
    };
    let dataset = Dataset {
        task: TaskKind::TweetParaphrase,
        samples: vec![
            Sample {
                id: "keep".to_string(),
                input_text: long_input.to_string(),
                profile: UserProfile {
                    user_id: "keep".to_string(),
                    documents: docs(10),
                },
                reference_output: long_input.to_string(),
            },
            Sample {
                id: "short".to_string(),
                input_text: "too short".to_string(),
                profile: UserProfile {
                    user_id: "short".to_string(),
                    documents: docs(10),
                },
                reference_output: "too short".to_string(),
            },
            Sample {
                id: "sparse".to_string(),
                input_text: long_input.to_string(),
                profile: UserProfile {
                    user_id: "sparse".to_string(),
                    documents: docs(2),
                },
                reference_output: long_input.to_string(),
            },
        ],
    };

    let dir = tempfile::tempdir().unwrap();
    let dataset_path = dir.path().join("tweets.json");
    let map = FieldMap::for_task(TaskKind::TweetParaphrase);
    clir_core::save_dataset(&dataset, &map, &dataset_path).unwrap();

    let cfg = ExperimentConfig::new(
        &dataset_path,
        TaskKind::TweetParaphrase,
        Mode::Bm25,
        dir.path().join("r.csv"),
    );
    let result = clir_core::run_experiment(&cfg).unwrap();
    let ids: Vec<&str> = result.rows.iter().map(|r| r.sample_id.as_str()).collect();
    assert_eq!(ids, ["keep"]);

    // Thresholds of zero disable the filter.
    let mut open = cfg.clone();
    open.min_words = 0;
    open.min_profile_docs = 0;
    assert_eq!(clir_core::run_experiment(&open).unwrap().rows.len(), 3);
}

#[test]
fn template_override_changes_the_prompt() {
    let dir = tempfile::tempdir().unwrap();
    let dataset_path = dir.path().join("dataset.json");
    let template_path = dir.path().join("tmpl.txt");
    let dataset = synthetic_dataset(2, 5);
    let map = FieldMap::for_task(dataset.task);
    clir_core::save_dataset(&dataset, &map, &dataset_path).unwrap();
    std::fs::write(&template_path, "reword <{input}> given {examples}\n").unwrap();

    let mut cfg = ExperimentConfig::new(
        &dataset_path,
        dataset.task,
        Mode::Bm25,
        dir.path().join("r.csv"),
    );
    cfg.template = Some(template_path);
    let result = clir_core::run_experiment(&cfg).unwrap();
    // The echo backend extracts through the custom template, so generation
    // still equals the input.
    for (row, sample) in result.rows.iter().zip(&dataset.samples) {
        if !row.retrieved_doc_ids.is_empty() {
            assert_eq!(row.generated_text, sample.input_text);
        }
    }
}

#[test]
fn table_expander_reaches_extra_documents_through_the_pipeline() {
    use clir_core::{Dataset, Document, ExpanderSpec, Sample, UserProfile};

    let dir = tempfile::tempdir().unwrap();
    let dataset_path = dir.path().join("dataset.json");
    let table_path = dir.path().join("table.json");
    std::fs::write(&table_path, r#"{"gun": ["firearm"]}"#).unwrap();

    let dataset = Dataset {
        task: TaskKind::NewsHeadline,
        samples: vec![Sample {
            id: "s1".to_string(),
            input_text: "gun drills".to_string(),
            profile: UserProfile {
                user_id: "u1".to_string(),
                documents: vec![
                    Document::new("direct", None, "gun safety course"),
                    Document::new("viaterm", None, "firearm storage basics"),
                    Document::new("off", None, "picnic by the lake"),
                ],
            },
            reference_output: "gun drills".to_string(),
        }],
    };
    let map = FieldMap::for_task(dataset.task);
    clir_core::save_dataset(&dataset, &map, &dataset_path).unwrap();

    let mut cfg = ExperimentConfig::new(
        &dataset_path,
        dataset.task,
        Mode::Tl,
        dir.path().join("r.csv"),
    );
    cfg.expander = ExpanderSpec::Table(table_path);

    let with_expander = clir_core::run_experiment(&cfg).unwrap();
    assert!(
        with_expander.rows[0]
            .retrieved_doc_ids
            .contains(&"viaterm".to_string()),
        "{:?}",
        with_expander.rows[0].retrieved_doc_ids
    );

    cfg.expander = ExpanderSpec::None;
    let without = clir_core::run_experiment(&cfg).unwrap();
    assert!(
        !without.rows[0]
            .retrieved_doc_ids
            .contains(&"viaterm".to_string())
    );
}

#[test]
fn dictionary_mode_gap_shows_in_synonym_report() {
    let dataset = synonym_fixture();
    let tl = experiment(Mode::Tl, Arc::new(gun_dictionary()), dataset.task)
        .run(&dataset)
        .unwrap();
    let bm = experiment(Mode::Bm25, Arc::new(gun_dictionary()), dataset.task)
        .run(&dataset)
        .unwrap();

    // Comparable Table-style aggregate rows: one per mode, same columns.
    let tl_report = clir_core::render_report(&tl).unwrap();
    let bm_report = clir_core::render_report(&bm).unwrap();
    let tl_agg = tl_report.lines().last().unwrap();
    let bm_agg = bm_report.lines().last().unwrap();
    assert!(tl_agg.starts_with("AGGREGATE,tl,"));
    assert!(bm_agg.starts_with("AGGREGATE,bm25,"));
    assert_eq!(tl_agg.split(',').count(), bm_agg.split(',').count(),);
    assert!(tl.rouge1.f1 > bm.rouge1.f1);
}
