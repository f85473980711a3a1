//! `clir` — run personalized retrieval experiments from the command line.
//!
//! Settings come from three layers: built-in defaults, an optional config
//! file named by the `CLIR_CONFIG` environment variable, and CLI flags.
//! Flags win. Exit codes: 0 success, 1 startup/config error, 2 I/O error
//! while writing the report.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use clir_core::{
    ConfigBuilder, ExpanderSpec, ExperimentConfig, LlmSpec, Mode, TaskKind, TranslatorSpec,
};

#[derive(Parser)]
#[command(
    name = "clir",
    version,
    about = "Cross-language retrieval experiment runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write a CSV report.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Dataset JSON file.
    #[arg(long)]
    dataset: Option<PathBuf>,

    /// Task: news | tweet.
    #[arg(long)]
    task: Option<String>,

    /// Retrieval mode: tl | bm25.
    #[arg(long)]
    mode: Option<String>,

    /// Translation chain, e.g. en-es-en or en-es-fr-en.
    #[arg(long)]
    chain: Option<String>,

    /// Translation backend: identity | dict:<path> | http:<url>.
    #[arg(long)]
    translator: Option<String>,

    /// LLM backend: echo | http:<url>.
    #[arg(long)]
    llm: Option<String>,

    /// Term expander: none | table:<path>.
    #[arg(long)]
    expander: Option<String>,

    /// Documents retrieved per stage.
    #[arg(long = "top-k")]
    top_k: Option<usize>,

    /// Maximum refinement iterations.
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,

    /// Minimum score-sum improvement to keep iterating.
    #[arg(long)]
    epsilon: Option<f64>,

    /// BM25 term-frequency saturation.
    #[arg(long)]
    k1: Option<f64>,

    /// BM25 length normalization in [0, 1].
    #[arg(long)]
    b: Option<f64>,

    /// Generation budget per sample.
    #[arg(long = "max-tokens")]
    max_tokens: Option<usize>,

    /// Prompt template file overriding the per-task default.
    #[arg(long)]
    template: Option<PathBuf>,

    /// Cap on documents fed to the prompt (default: uncapped).
    #[arg(long = "prompt-doc-cap")]
    prompt_doc_cap: Option<usize>,

    /// Tweet filter: minimum input words.
    #[arg(long = "min-words")]
    min_words: Option<usize>,

    /// Tweet filter: minimum profile documents.
    #[arg(long = "min-profile-docs")]
    min_profile_docs: Option<usize>,

    /// Evaluate at most this many samples.
    #[arg(long)]
    limit: Option<usize>,

    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Concurrent samples.
    #[arg(long)]
    parallel: Option<usize>,

    /// Reserved for stochastic backends.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match cli.command {
        Command::Run(args) => run(args),
    }
}

fn run(args: RunArgs) -> ExitCode {
    let cfg = match build_config(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("clir: {e}");
            return ExitCode::from(1);
        }
    };

    let result = match clir_core::run_experiment(&cfg) {
        Ok(result) => result,
        Err(e) => {
            eprintln!("clir: {e}");
            return ExitCode::from(1);
        }
    };

    if let Err(e) = clir_core::emit_report(&result, &cfg.out) {
        eprintln!("clir: {e}");
        return ExitCode::from(2);
    }

    println!(
        "wrote {} ({} samples, mode {})",
        cfg.out.display(),
        result.rows.len(),
        result.mode
    );
    println!(
        "rouge1  P {:.6}  R {:.6}  F1 {:.6}",
        result.rouge1.precision, result.rouge1.recall, result.rouge1.f1
    );
    println!(
        "rougeL  P {:.6}  R {:.6}  F1 {:.6}",
        result.rouge_l.precision, result.rouge_l.recall, result.rouge_l.f1
    );
    ExitCode::SUCCESS
}

fn build_config(args: RunArgs) -> clir_core::Result<ExperimentConfig> {
    let mut builder = ConfigBuilder::default();
    if let Ok(path) = std::env::var("CLIR_CONFIG") {
        builder.apply_file(path.as_ref())?;
    }

    if let Some(v) = args.dataset {
        builder.dataset = Some(v);
    }
    if let Some(v) = &args.task {
        builder.task = Some(TaskKind::parse(v)?);
    }
    if let Some(v) = &args.mode {
        builder.mode = Some(Mode::parse(v)?);
    }
    if let Some(v) = args.chain {
        builder.chain = Some(v);
    }
    if let Some(v) = &args.translator {
        builder.translator = Some(TranslatorSpec::parse(v)?);
    }
    if let Some(v) = &args.llm {
        builder.llm = Some(LlmSpec::parse(v)?);
    }
    if let Some(v) = &args.expander {
        builder.expander = Some(ExpanderSpec::parse(v)?);
    }
    if let Some(v) = args.top_k {
        builder.top_k = Some(v);
    }
    if let Some(v) = args.max_iters {
        builder.max_iterations = Some(v);
    }
    if let Some(v) = args.epsilon {
        builder.epsilon = Some(v);
    }
    if let Some(v) = args.k1 {
        builder.k1 = Some(v);
    }
    if let Some(v) = args.b {
        builder.b = Some(v);
    }
    if let Some(v) = args.max_tokens {
        builder.max_tokens = Some(v);
    }
    if let Some(v) = args.template {
        builder.template = Some(v);
    }
    if let Some(v) = args.prompt_doc_cap {
        builder.prompt_doc_cap = Some(v);
    }
    if let Some(v) = args.min_words {
        builder.min_words = Some(v);
    }
    if let Some(v) = args.min_profile_docs {
        builder.min_profile_docs = Some(v);
    }
    if let Some(v) = args.limit {
        builder.limit = Some(v);
    }
    if let Some(v) = args.out {
        builder.out = Some(v);
    }
    if let Some(v) = args.parallel {
        builder.parallel = Some(v);
    }
    if let Some(v) = args.seed {
        builder.seed = Some(v);
    }

    builder.build()
}
