//! Personalized rephrasing prompts and the LLM backend interface.
//!
//! The default news template reproduces the production prompt wording
//! verbatim, original spellings included; overriding templates is a config
//! concern. The echo backend extracts the input text back out of a rendered
//! prompt, which keeps the whole pipeline deterministic offline.

use crate::corpus::{Document, TaskKind};
use crate::error::{Error, Result};
use crate::http::{Gate, HttpConfig, agent, post_json};

/// Default generation budget.
pub const DEFAULT_MAX_TOKENS: usize = 64;

const INPUT_SLOT: &str = "{input}";
const EXAMPLES_SLOT: &str = "{examples}";

const NEWS_TEMPLATE: &str = "rephrase the this news title \"{input}\" using user profile examples titles : {examples}. Just give me the rephared sentence";
const TWEET_TEMPLATE: &str = "rephrase this tweet \"{input}\" using user profile examples tweets : {examples}. Just give me the rephrased sentence";

/// A prompt template with `{input}` and `{examples}` placeholders, each
/// required exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    template: String,
}

impl PromptTemplate {
    pub fn new(template: impl Into<String>) -> Result<Self> {
        let template = template.into();
        for slot in [INPUT_SLOT, EXAMPLES_SLOT] {
            match template.matches(slot).count() {
                1 => {}
                n => {
                    return Err(Error::Config(format!(
                        "template must contain {slot} exactly once, found {n}"
                    )));
                }
            }
        }
        Ok(PromptTemplate { template })
    }

    /// The built-in news headline template.
    pub fn news_default() -> Self {
        PromptTemplate {
            template: NEWS_TEMPLATE.to_string(),
        }
    }

    /// The built-in tweet paraphrasing template.
    pub fn tweet_default() -> Self {
        PromptTemplate {
            template: TWEET_TEMPLATE.to_string(),
        }
    }

    pub fn for_task(task: TaskKind) -> Self {
        match task {
            TaskKind::NewsHeadline => Self::news_default(),
            TaskKind::TweetParaphrase => Self::tweet_default(),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.template
    }

    /// Substitute both placeholders. `{examples}` goes first so input text
    /// containing a literal `{examples}` stays untouched, which keeps
    /// rendering injective in the input.
    fn render(&self, input: &str, examples: &str) -> String {
        self.template
            .replacen(EXAMPLES_SLOT, examples, 1)
            .replacen(INPUT_SLOT, input, 1)
    }

    /// Recover the input text from a rendered prompt using the literal
    /// segments around `{input}`. Used by the echo backend; assumes the
    /// anchor segments do not also occur inside the substituted values.
    pub fn extract_input<'a>(&self, prompt: &'a str) -> Option<&'a str> {
        let (before, after) = self.template.split_once(INPUT_SLOT)?;
        let prefix = before.rsplit(EXAMPLES_SLOT).next().unwrap_or(before);
        let suffix = after.split(EXAMPLES_SLOT).next().unwrap_or(after);

        let start = if before.contains(EXAMPLES_SLOT) {
            prompt.find(prefix)? + prefix.len()
        } else {
            if !prompt.starts_with(before) {
                return None;
            }
            before.len()
        };
        let end = if suffix.is_empty() {
            prompt.len()
        } else {
            start + prompt[start..].find(suffix)?
        };
        Some(&prompt[start..end])
    }
}

/// Render the personalized prompt: `{input}` becomes the input text and
/// `{examples}` a bracketed, comma-separated list of double-quoted document
/// display texts, in document order.
pub fn build_prompt(input_text: &str, docs: &[&Document], tmpl: &PromptTemplate) -> Result<String> {
    if docs.is_empty() {
        return Err(Error::Usage(
            "prompt construction requires at least one document".to_string(),
        ));
    }
    let examples = format!(
        "[{}]",
        docs.iter()
            .map(|d| format!("\"{}\"", d.display_text()))
            .collect::<Vec<_>>()
            .join(" , ")
    );
    Ok(tmpl.render(input_text, &examples))
}

/// A text-generation backend. Implementations must be safe for concurrent
/// calls.
pub trait LlmClient: Send + Sync {
    fn generate(&self, prompt: &str, max_tokens: usize) -> Result<String>;
}

/// Offline backend that answers with the prompt's `{input}` text, i.e. an
/// identity paraphrase.
#[derive(Debug, Clone)]
pub struct EchoLlm {
    template: PromptTemplate,
}

impl EchoLlm {
    pub fn new(template: PromptTemplate) -> Self {
        EchoLlm { template }
    }
}

impl LlmClient for EchoLlm {
    fn generate(&self, prompt: &str, _max_tokens: usize) -> Result<String> {
        self.template
            .extract_input(prompt)
            .map(str::to_string)
            .ok_or_else(|| {
                Error::Generation("echo backend: prompt does not match the template".to_string())
            })
    }
}

/// Remote LLM client.
///
/// Wire format: `POST {base_url}/generate` with body
/// `{"prompt", "max_tokens"}`; a 200 response must carry `{"text": string}`.
/// Failed requests are retried with exponential backoff, and concurrent
/// in-flight requests are capped.
pub struct HttpLlm {
    base_url: String,
    agent: ureq::Agent,
    cfg: HttpConfig,
    gate: Gate,
}

impl HttpLlm {
    pub fn new(base_url: impl Into<String>, cfg: HttpConfig) -> Self {
        let base_url = base_url.into().trim_end_matches('/').to_string();
        HttpLlm {
            agent: agent(&cfg),
            gate: Gate::new(cfg.max_in_flight),
            base_url,
            cfg,
        }
    }
}

impl LlmClient for HttpLlm {
    fn generate(&self, prompt: &str, max_tokens: usize) -> Result<String> {
        let _slot = self.gate.acquire();
        let url = format!("{}/generate", self.base_url);
        let body = serde_json::json!({ "prompt": prompt, "max_tokens": max_tokens });
        let value = post_json(&self.agent, &url, &body, self.cfg.retries).map_err(|e| match e {
            Error::Backend(msg) => Error::Generation(msg),
            other => other,
        })?;
        match value.get("text").and_then(serde_json::Value::as_str) {
            Some(s) => Ok(s.to_string()),
            None => Err(Error::Generation(format!(
                "{url}: response missing `text` field"
            ))),
        }
    }
}

/// Run a backend call and normalize the response: trim surrounding
/// whitespace and strip one pair of wrapping double quotes when the whole
/// response is quoted.
pub fn generate_output(client: &dyn LlmClient, prompt: &str, max_tokens: usize) -> Result<String> {
    let raw = client.generate(prompt, max_tokens)?;
    let trimmed = raw.trim();
    let unquoted = if trimmed.len() >= 2 && trimmed.starts_with('"') && trimmed.ends_with('"') {
        &trimmed[1..trimmed.len() - 1]
    } else {
        trimmed
    };
    Ok(unquoted.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(id: &str, title: Option<&str>, body: &str) -> Document {
        Document::new(id, title.map(str::to_string), body)
    }

    #[test]
    fn news_template_renders_exactly() {
        let docs = [
            doc("1", Some("A"), "ignored"),
            doc("2", Some("B"), "ignored"),
        ];
        let refs: Vec<&Document> = docs.iter().collect();
        let prompt = build_prompt("X", &refs, &PromptTemplate::news_default()).unwrap();
        assert_eq!(
            prompt,
            "rephrase the this news title \"X\" using user profile examples titles : [\"A\" , \"B\"]. Just give me the rephared sentence"
        );
    }

    #[test]
    fn single_document_renders_without_comma() {
        let docs = [doc("1", Some("A"), "ignored")];
        let refs: Vec<&Document> = docs.iter().collect();
        let prompt = build_prompt("X", &refs, &PromptTemplate::news_default()).unwrap();
        assert!(prompt.contains("[\"A\"]"));
        assert!(!prompt.contains(" , "));
    }

    #[test]
    fn document_order_is_preserved() {
        let docs = [doc("1", Some("B"), ""), doc("2", Some("A"), "")];
        let refs: Vec<&Document> = docs.iter().collect();
        let prompt = build_prompt("X", &refs, &PromptTemplate::news_default()).unwrap();
        assert!(prompt.contains("[\"B\" , \"A\"]"));
    }

    #[test]
    fn untitled_documents_fall_back_to_body() {
        let docs = [doc("1", None, "body text")];
        let refs: Vec<&Document> = docs.iter().collect();
        let prompt = build_prompt("X", &refs, &PromptTemplate::tweet_default()).unwrap();
        assert!(prompt.contains("[\"body text\"]"));
    }

    #[test]
    fn empty_docs_are_a_usage_error() {
        assert!(matches!(
            build_prompt("X", &[], &PromptTemplate::news_default()),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn template_requires_both_placeholders_once() {
        assert!(PromptTemplate::new("only {input}").is_err());
        assert!(PromptTemplate::new("{input} {examples} {input}").is_err());
        assert!(PromptTemplate::new("{input} then {examples}").is_ok());
    }

    #[test]
    fn echo_returns_the_embedded_input() {
        let tmpl = PromptTemplate::news_default();
        let docs = [doc("1", Some("A"), "")];
        let refs: Vec<&Document> = docs.iter().collect();
        let input = "Your loans were made at the height of the housing bubble.";
        let prompt = build_prompt(input, &refs, &tmpl).unwrap();
        let echo = EchoLlm::new(tmpl);
        assert_eq!(generate_output(&echo, &prompt, 64).unwrap(), input);
    }

    #[test]
    fn echo_handles_examples_before_input() {
        let tmpl = PromptTemplate::new("given {examples} rephrase <{input}>").unwrap();
        let docs = [doc("1", None, "ex")];
        let refs: Vec<&Document> = docs.iter().collect();
        let prompt = build_prompt("the text", &refs, &tmpl).unwrap();
        assert_eq!(tmpl.extract_input(&prompt), Some("the text"));
    }

    #[test]
    fn quoted_response_is_unwrapped() {
        struct Quoted;
        impl LlmClient for Quoted {
            fn generate(&self, _p: &str, _m: usize) -> Result<String> {
                Ok("  \"hello\"\n".to_string())
            }
        }
        assert_eq!(generate_output(&Quoted, "p", 8).unwrap(), "hello");
    }

    #[test]
    fn inner_quotes_survive_unwrapping() {
        struct Quoted;
        impl LlmClient for Quoted {
            fn generate(&self, _p: &str, _m: usize) -> Result<String> {
                Ok("\"say \"hi\" now\"".to_string())
            }
        }
        assert_eq!(generate_output(&Quoted, "p", 8).unwrap(), "say \"hi\" now");
    }

    #[test]
    fn prompt_contains_each_display_text_once() {
        let docs = [
            doc("1", Some("alpha title"), ""),
            doc("2", Some("beta title"), ""),
            doc("3", None, "gamma body"),
        ];
        let refs: Vec<&Document> = docs.iter().collect();
        let prompt = build_prompt("input", &refs, &PromptTemplate::news_default()).unwrap();
        for d in &docs {
            assert_eq!(prompt.matches(d.display_text()).count(), 1);
        }
    }

    proptest! {
        #[test]
        fn rendering_is_injective_in_the_input(a in "[a-zA-Z0-9 ]{0,30}", b in "[a-zA-Z0-9 ]{0,30}") {
            prop_assume!(a != b);
            let docs = [doc("1", Some("E"), "")];
            let refs: Vec<&Document> = docs.iter().collect();
            let tmpl = PromptTemplate::news_default();
            let pa = build_prompt(&a, &refs, &tmpl).unwrap();
            let pb = build_prompt(&b, &refs, &tmpl).unwrap();
            prop_assert_ne!(pa, pb);
        }
    }
}
