//! Translation backends and multi-hop round-trip translation.
//!
//! A [`TranslationChain`] is an ordered list of language hops that starts and
//! ends in the source language, e.g. `en-es-en` or `en-es-fr-en`. Three
//! backends implement [`Translator`]: a remote HTTP service, an offline
//! word-level dictionary and the identity function. The dictionary and
//! identity backends keep the whole pipeline deterministic for tests and CI.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::corpus::tokenize;
use crate::error::{Error, Result};
use crate::http::{Gate, HttpConfig, agent, post_json};

/// A two-letter lowercase ISO language code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LangCode([u8; 2]);

impl LangCode {
    /// Parse a code, accepting exactly two ASCII lowercase letters.
    pub fn parse(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        if bytes.len() == 2 && bytes.iter().all(|b| b.is_ascii_lowercase()) {
            Ok(LangCode([bytes[0], bytes[1]]))
        } else {
            Err(Error::Chain {
                spec: s.to_string(),
                message: "language codes must be two ASCII lowercase letters".to_string(),
            })
        }
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("ascii code")
    }
}

impl fmt::Display for LangCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An ordered list of language hops forming a round trip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationChain {
    hops: Vec<LangCode>,
}

impl TranslationChain {
    /// Parse a hyphen-separated chain spec such as `en-es-en`.
    ///
    /// A valid chain has at least three hops, returns to its source language
    /// and never repeats a language in consecutive hops.
    pub fn parse(spec: &str) -> Result<Self> {
        let err = |message: &str| Error::Chain {
            spec: spec.to_string(),
            message: message.to_string(),
        };

        let hops = spec
            .split('-')
            .map(LangCode::parse)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| match e {
                Error::Chain {
                    spec: code,
                    message,
                } => Error::Chain {
                    spec: spec.to_string(),
                    message: format!("bad code `{code}`: {message}"),
                },
                other => other,
            })?;

        if hops.len() < 3 {
            return Err(err("a round trip needs at least three hops"));
        }
        if hops.first() != hops.last() {
            return Err(err("the chain must return to its source language"));
        }
        if hops.windows(2).any(|pair| pair[0] == pair[1]) {
            return Err(err("consecutive hops must differ"));
        }
        Ok(TranslationChain { hops })
    }

    pub fn hops(&self) -> &[LangCode] {
        &self.hops
    }

    /// The source (and final) language.
    pub fn source(&self) -> LangCode {
        self.hops[0]
    }

    /// Consecutive (source, target) hop pairs, in order.
    pub fn pairs(&self) -> impl Iterator<Item = (LangCode, LangCode)> + '_ {
        self.hops.windows(2).map(|w| (w[0], w[1]))
    }
}

impl FromStr for TranslationChain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TranslationChain::parse(s)
    }
}

impl fmt::Display for TranslationChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for hop in &self.hops {
            if !first {
                f.write_str("-")?;
            }
            f.write_str(hop.as_str())?;
            first = false;
        }
        Ok(())
    }
}

/// A translation backend. Implementations must be safe for concurrent calls
/// and deterministic for a fixed configuration, and must not turn nonempty
/// input into empty output unless they error.
pub trait Translator: Send + Sync {
    fn translate(&self, text: &str, source: LangCode, target: LangCode) -> Result<String>;
}

/// Apply a translator across each consecutive hop pair of the chain.
///
/// A backend failure is reported with the zero-based hop index at which it
/// occurred; callers decide whether to fall back.
pub fn round_trip(t: &dyn Translator, text: &str, chain: &TranslationChain) -> Result<String> {
    let mut current = text.to_string();
    for (hop, (source, target)) in chain.pairs().enumerate() {
        current = t
            .translate(&current, source, target)
            .map_err(|e| Error::Translation {
                hop,
                message: e.to_string(),
            })?;
    }
    Ok(current)
}

/// Backend that returns its input unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTranslator;

impl Translator for IdentityTranslator {
    fn translate(&self, text: &str, _source: LangCode, _target: LangCode) -> Result<String> {
        Ok(text.to_string())
    }
}

/// Offline word-level dictionary backend.
///
/// Holds one lowercase token map per ordered language pair (`"en-es"`).
/// Input is tokenized with the shared corpus tokenizer, unknown tokens pass
/// through unchanged and the output is joined with single spaces. A missing
/// pair behaves as an empty map. Input that tokenizes to nothing (for
/// example punctuation only) is returned unchanged.
#[derive(Debug, Clone, Default)]
pub struct DictionaryTranslator {
    maps: HashMap<String, HashMap<String, String>>,
}

impl DictionaryTranslator {
    pub fn new(maps: HashMap<String, HashMap<String, String>>) -> Self {
        DictionaryTranslator { maps }
    }

    /// Load pair maps from a JSON file of the form
    /// `{"en-es": {"gun": "arma"}, "es-en": {"arma": "weapon"}}`.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let maps: HashMap<String, HashMap<String, String>> =
            serde_json::from_str(&raw).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        Ok(DictionaryTranslator { maps })
    }
}

impl Translator for DictionaryTranslator {
    fn translate(&self, text: &str, source: LangCode, target: LangCode) -> Result<String> {
        let key = format!("{source}-{target}");
        let empty = HashMap::new();
        let map = self.maps.get(&key).unwrap_or(&empty);

        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Ok(text.to_string());
        }
        let translated: Vec<&str> = tokens
            .iter()
            .map(|tok| map.get(tok).map_or(tok.as_str(), String::as_str))
            .collect();
        Ok(translated.join(" "))
    }
}

/// Remote translation service client.
///
/// Wire format: `POST {base_url}/translate` with body
/// `{"text", "source", "target"}`; a 200 response must carry
/// `{"translation": string}`. Failed requests are retried with exponential
/// backoff, and concurrent in-flight requests are capped.
pub struct HttpTranslator {
    base_url: String,
    agent: ureq::Agent,
    cfg: HttpConfig,
    gate: Gate,
}

impl HttpTranslator {
    pub fn new(base_url: impl Into<String>, cfg: HttpConfig) -> Self {
        let base_url = base_url.into().trim_end_matches('/').to_string();
        HttpTranslator {
            agent: agent(&cfg),
            gate: Gate::new(cfg.max_in_flight),
            base_url,
            cfg,
        }
    }
}

impl Translator for HttpTranslator {
    fn translate(&self, text: &str, source: LangCode, target: LangCode) -> Result<String> {
        let _slot = self.gate.acquire();
        let url = format!("{}/translate", self.base_url);
        let body = serde_json::json!({
            "text": text,
            "source": source.as_str(),
            "target": target.as_str(),
        });
        let value = post_json(&self.agent, &url, &body, self.cfg.retries)?;
        match value.get("translation").and_then(serde_json::Value::as_str) {
            Some(s) if s.is_empty() && !text.is_empty() => Err(Error::Backend(format!(
                "{url}: empty translation for nonempty input"
            ))),
            Some(s) => Ok(s.to_string()),
            None => Err(Error::Backend(format!(
                "{url}: response missing `translation` field"
            ))),
        }
    }
}

/// Test fixture shared with the expansion tests: a dictionary whose
/// en-es-en round trip maps "gun" to "weapon" and passes everything else
/// through.
#[cfg(test)]
pub(crate) fn test_gun_dictionary() -> DictionaryTranslator {
    let mut en_es = HashMap::new();
    en_es.insert("gun".to_string(), "arma".to_string());
    let mut es_en = HashMap::new();
    es_en.insert("arma".to_string(), "weapon".to_string());
    let mut maps = HashMap::new();
    maps.insert("en-es".to_string(), en_es);
    maps.insert("es-en".to_string(), es_en);
    DictionaryTranslator::new(maps)
}
