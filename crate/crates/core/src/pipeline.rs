//! End-to-end experiment orchestration: ingest a dataset, run the TL or
//! BM25 retrieval path per sample, generate outputs, score them against the
//! references and emit a CSV report.
//!
//! Samples are isolated: any backend failure is recorded in the row's
//! warnings and scored as an empty generation instead of aborting the run.
//! With deterministic backends the report is byte-identical across runs.

use std::path::Path;
use std::sync::Arc;
use std::sync::Mutex;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::bm25::Bm25Index;
use crate::config::{ExpanderSpec, ExperimentConfig, LlmSpec, Mode, TranslatorSpec};
use crate::corpus::{self, Dataset, Sample, TaskKind, tokenize};
use crate::error::{Error, Result};
use crate::expand::{TermExpander, retrieve_tl};
use crate::http::HttpConfig;
use crate::prompt::{EchoLlm, HttpLlm, LlmClient, PromptTemplate, build_prompt, generate_output};
use crate::rouge::{RougeScore, aggregate, rouge_1, rouge_l};
use crate::translate::{
    DictionaryTranslator, HttpTranslator, IdentityTranslator, TranslationChain, Translator,
};

/// Per-sample experiment outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub sample_id: String,
    pub mode: Mode,
    pub generated_text: String,
    pub rouge1: RougeScore,
    pub rouge_l: RougeScore,
    pub retrieved_doc_ids: Vec<String>,
    pub iterations_used: usize,
    pub warnings: Vec<String>,
}

/// All rows plus the macro-averaged metrics, rows ordered by sample id.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub mode: Mode,
    pub rows: Vec<ReportRow>,
    pub rouge1: RougeScore,
    pub rouge_l: RougeScore,
}

/// A resolved experiment: validated settings plus instantiated backends.
///
/// Built from an [`ExperimentConfig`] by [`Experiment::prepare`], or
/// assembled directly to inject custom backends.
pub struct Experiment {
    pub mode: Mode,
    pub chain: TranslationChain,
    pub bm25: crate::bm25::Bm25Params,
    pub refinement: crate::expand::RefinementConfig,
    pub template: PromptTemplate,
    pub max_tokens: usize,
    pub prompt_doc_cap: Option<usize>,
    pub parallel: usize,
    pub translator: Arc<dyn Translator>,
    pub expander: Option<Arc<dyn TermExpander>>,
    pub llm: Arc<dyn LlmClient>,
}

impl Experiment {
    /// Load the dataset and instantiate backends per the config.
    ///
    /// Tweet datasets are filtered by the configured thresholds; `limit`
    /// caps the sample count after filtering. A dataset that ends up empty
    /// is a startup error because the aggregate would be undefined.
    pub fn prepare(cfg: &ExperimentConfig) -> Result<(Dataset, Experiment)> {
        cfg.validate()?;
        let chain = TranslationChain::parse(&cfg.chain)?;

        let template = match &cfg.template {
            Some(path) => {
                let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                PromptTemplate::new(raw.trim_end())?
            }
            None => PromptTemplate::for_task(cfg.task),
        };

        let translator: Arc<dyn Translator> = match &cfg.translator {
            TranslatorSpec::Identity => Arc::new(IdentityTranslator),
            TranslatorSpec::Dict(path) => Arc::new(DictionaryTranslator::from_file(path)?),
            TranslatorSpec::Http(url) => Arc::new(HttpTranslator::new(
                url.clone(),
                HttpConfig::translation_default(),
            )),
        };
        let expander: Option<Arc<dyn TermExpander>> = match &cfg.expander {
            ExpanderSpec::None => None,
            ExpanderSpec::Table(path) => {
                Some(Arc::new(crate::expand::TableExpander::from_file(path)?))
            }
        };
        let llm: Arc<dyn LlmClient> = match &cfg.llm {
            LlmSpec::Echo => Arc::new(EchoLlm::new(template.clone())),
            LlmSpec::Http(url) => Arc::new(HttpLlm::new(url.clone(), HttpConfig::llm_default())),
        };

        let mut dataset = corpus::load_dataset(&cfg.dataset, cfg.task, &cfg.field_map)?;
        if cfg.task == TaskKind::TweetParaphrase {
            dataset = corpus::filter_tweet_dataset(&dataset, cfg.min_words, cfg.min_profile_docs)?;
        }
        if let Some(limit) = cfg.limit {
            dataset.samples.truncate(limit);
        }
        if dataset.samples.is_empty() {
            return Err(Error::Config(format!(
                "dataset {} has no samples to evaluate",
                cfg.dataset.display()
            )));
        }

        Ok((
            dataset,
            Experiment {
                mode: cfg.mode,
                chain,
                bm25: cfg.bm25,
                refinement: cfg.refinement(),
                template,
                max_tokens: cfg.max_tokens,
                prompt_doc_cap: cfg.prompt_doc_cap,
                parallel: cfg.parallel,
                translator,
                expander,
                llm,
            },
        ))
    }

    /// Run one sample to a row. Never fails: problems surface as warnings
    /// and an empty generation scores zero.
    pub fn run_sample(&self, sample: &Sample) -> ReportRow {
        let mut warnings = Vec::new();

        let (retrieved_doc_ids, iterations_used) =
            match Bm25Index::build(&sample.profile.documents, self.bm25) {
                Err(e) => {
                    warnings.push(format!("indexing failed: {e}"));
                    (Vec::new(), 0)
                }
                Ok(index) => match self.mode {
                    Mode::Bm25 => {
                        let hits =
                            index.retrieve(&tokenize(&sample.input_text), self.refinement.top_k);
                        (hits.into_iter().map(|d| d.doc_id).collect(), 0)
                    }
                    Mode::Tl => {
                        let tl = retrieve_tl(
                            sample,
                            &index,
                            self.translator.as_ref(),
                            &self.chain,
                            self.expander.as_deref(),
                            &self.refinement,
                            &mut warnings,
                        );
                        (tl.doc_ids, tl.iterations)
                    }
                },
            };

        let mut docs: Vec<&corpus::Document> = retrieved_doc_ids
            .iter()
            .filter_map(|id| sample.profile.documents.iter().find(|d| d.id() == id))
            .collect();
        if let Some(cap) = self.prompt_doc_cap {
            docs.truncate(cap);
        }

        let generated_text = if docs.is_empty() {
            warnings.push("no documents retrieved; generation skipped".to_string());
            String::new()
        } else {
            build_prompt(&sample.input_text, &docs, &self.template)
                .and_then(|prompt| generate_output(self.llm.as_ref(), &prompt, self.max_tokens))
                .unwrap_or_else(|e| {
                    warnings.push(format!("generation failed: {e}"));
                    String::new()
                })
        };

        let hyp = tokenize(&generated_text);
        let reference = tokenize(&sample.reference_output);

        ReportRow {
            sample_id: sample.id.clone(),
            mode: self.mode,
            rouge1: rouge_1(&hyp, &reference),
            rouge_l: rouge_l(&hyp, &reference),
            generated_text,
            retrieved_doc_ids,
            iterations_used,
            warnings,
        }
    }

    /// Run every sample under the configured parallelism and aggregate.
    /// Rows come back ordered by sample id regardless of schedule.
    pub fn run(&self, dataset: &Dataset) -> Result<ExperimentResult> {
        if dataset.samples.is_empty() {
            return Err(Error::Config(
                "cannot run an experiment over zero samples".to_string(),
            ));
        }

        let mut rows = self.run_rows(&dataset.samples);
        rows.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));

        let r1: Vec<RougeScore> = rows.iter().map(|r| r.rouge1).collect();
        let rl: Vec<RougeScore> = rows.iter().map(|r| r.rouge_l).collect();
        Ok(ExperimentResult {
            mode: self.mode,
            rouge1: aggregate(&r1)?,
            rouge_l: aggregate(&rl)?,
            rows,
        })
    }

    fn run_rows(&self, samples: &[Sample]) -> Vec<ReportRow> {
        let workers = self.parallel.min(samples.len()).max(1);
        if workers == 1 {
            return samples.iter().map(|s| self.run_sample(s)).collect();
        }

        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<ReportRow>>> =
            samples.iter().map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| {
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= samples.len() {
                            break;
                        }
                        let row = self.run_sample(&samples[i]);
                        *slots[i].lock().expect("row slot") = Some(row);
                    }
                });
            }
        });
        slots
            .into_iter()
            .map(|slot| {
                slot.into_inner()
                    .expect("row slot")
                    .expect("worker filled slot")
            })
            .collect()
    }
}

/// Load, run and aggregate in one call.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let (dataset, experiment) = Experiment::prepare(cfg)?;
    experiment.run(&dataset)
}

const CSV_HEADER: &str = "sample_id,mode,generated_text,r1_p,r1_r,r1_f1,rl_p,rl_r,rl_f1,retrieved_doc_ids,iterations_used,warnings";

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') || s.contains('\r') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn fmt_score(x: f64) -> String {
    format!("{x:.6}")
}

/// Serialize a result to CSV text: header, one line per row, one aggregate
/// line. UTF-8, LF line endings.
pub fn render_report(result: &ExperimentResult) -> Result<String> {
    if result.rows.is_empty() {
        return Err(Error::Usage(
            "cannot emit a report with zero rows".to_string(),
        ));
    }

    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &result.rows {
        let fields = [
            csv_field(&row.sample_id),
            row.mode.as_str().to_string(),
            csv_field(&row.generated_text),
            fmt_score(row.rouge1.precision),
            fmt_score(row.rouge1.recall),
            fmt_score(row.rouge1.f1),
            fmt_score(row.rouge_l.precision),
            fmt_score(row.rouge_l.recall),
            fmt_score(row.rouge_l.f1),
            csv_field(&row.retrieved_doc_ids.join(";")),
            row.iterations_used.to_string(),
            csv_field(&row.warnings.join("; ")),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    let aggregate_fields = [
        "AGGREGATE".to_string(),
        result.mode.as_str().to_string(),
        String::new(),
        fmt_score(result.rouge1.precision),
        fmt_score(result.rouge1.recall),
        fmt_score(result.rouge1.f1),
        fmt_score(result.rouge_l.precision),
        fmt_score(result.rouge_l.recall),
        fmt_score(result.rouge_l.f1),
        String::new(),
        String::new(),
        String::new(),
    ];
    out.push_str(&aggregate_fields.join(","));
    out.push('\n');
    Ok(out)
}

/// Write the CSV report to disk.
pub fn emit_report(result: &ExperimentResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = render_report(result)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
