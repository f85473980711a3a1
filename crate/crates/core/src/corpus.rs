//! Data model for user-profiled documents and ingestion of profile-style
//! JSON datasets.
//!
//! The tokenizer defined here is the single normalization rule shared by
//! indexing, query expansion and metric computation.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Tokenize text into lowercase word tokens.
///
/// Unicode-lowercases the input, splits on maximal runs of non-alphanumeric
/// characters and drops empty fragments. Deterministic; no stemming, no
/// stopword removal.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// The two evaluation tasks a dataset can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    /// Personalized news headline generation.
    NewsHeadline,
    /// Personalized tweet paraphrasing.
    TweetParaphrase,
}

impl TaskKind {
    /// Short name used by the CLI and config files.
    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::NewsHeadline => "news",
            TaskKind::TweetParaphrase => "tweet",
        }
    }

    /// Parse the CLI/config spelling (`news` or `tweet`).
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "news" => Ok(TaskKind::NewsHeadline),
            "tweet" => Ok(TaskKind::TweetParaphrase),
            other => Err(Error::Config(format!(
                "unknown task `{other}` (expected `news` or `tweet`)"
            ))),
        }
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single profile document with its cached token list.
///
/// Tokens are derived once at construction from the title (when present)
/// concatenated with the body, and never change afterwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    id: String,
    title: Option<String>,
    body: String,
    tokens: Vec<String>,
}

impl Document {
    /// Build a document, caching its token list.
    pub fn new(id: impl Into<String>, title: Option<String>, body: impl Into<String>) -> Self {
        let body = body.into();
        let tokens = match &title {
            Some(t) => tokenize(&format!("{t} {body}")),
            None => tokenize(&body),
        };
        Document {
            id: id.into(),
            title,
            body,
            tokens,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn title(&self) -> Option<&str> {
        self.title.as_deref()
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    /// Cached tokens of title-plus-body.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Text shown in prompts: the title when present, otherwise the body.
    pub fn display_text(&self) -> &str {
        self.title.as_deref().unwrap_or(&self.body)
    }
}

/// A user's document collection, in file order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UserProfile {
    pub user_id: String,
    pub documents: Vec<Document>,
}

/// One evaluation unit: an input text, the owning user's profile and the
/// gold reference output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub id: String,
    pub input_text: String,
    pub profile: UserProfile,
    pub reference_output: String,
}

/// A loaded dataset: the task plus its samples in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub task: TaskKind,
    pub samples: Vec<Sample>,
}

/// Maps the five logical record fields onto the JSON field names of a
/// concrete dataset file.
///
/// `profile_text` names the text field(s) of a profile entry: a single name
/// (`"text"`) maps that field to the document body, while a `+`-joined pair
/// (`"title+text"`) maps the first name to the document title and the second
/// to the body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMap {
    pub id: String,
    pub input: String,
    pub profile: String,
    pub profile_text: String,
    pub output: String,
}

impl FieldMap {
    /// Default mapping for a task. News profiles index titles; tweet
    /// profiles index the tweet text.
    pub fn for_task(task: TaskKind) -> Self {
        let profile_text = match task {
            TaskKind::NewsHeadline => "title",
            TaskKind::TweetParaphrase => "text",
        };
        FieldMap {
            id: "id".to_string(),
            input: "input".to_string(),
            profile: "profile".to_string(),
            profile_text: profile_text.to_string(),
            output: "output".to_string(),
        }
    }

    /// Split `profile_text` into (title field, body field).
    ///
    /// Returns `(None, body)` for the single-name form.
    fn text_fields(&self) -> (Option<&str>, &str) {
        match self.profile_text.split_once('+') {
            Some((title, body)) => (Some(title.trim()), body.trim()),
            None => (None, self.profile_text.as_str()),
        }
    }
}

/// Load a dataset from a JSON file.
///
/// Two file shapes are accepted:
/// - a JSON array of records carrying the output field inline, or
/// - a JSON object `{"inputs": [...], "outputs": [...]}` where outputs are
///   `{id, output}` records joined to inputs by id.
///
/// One `Sample` is produced per input record; profile entries become
/// `Document`s in file order.
pub fn load_dataset(path: impl AsRef<Path>, task: TaskKind, map: &FieldMap) -> Result<Dataset> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: Value = serde_json::from_str(&raw).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;

    let samples = match value {
        Value::Array(records) => parse_records(&records, map, None)?,
        Value::Object(obj) => {
            let inputs =
                obj.get("inputs")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Parse {
                        path: path.to_path_buf(),
                        message: "object form requires an `inputs` array".to_string(),
                    })?;
            let outputs = obj
                .get("outputs")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    message: "object form requires an `outputs` array".to_string(),
                })?;
            let output_by_id = parse_outputs(outputs, map)?;
            parse_records(inputs, map, Some(&output_by_id))?
        }
        _ => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: "expected a JSON array of records or an {inputs, outputs} object"
                    .to_string(),
            });
        }
    };

    Ok(Dataset { task, samples })
}

/// Keep only tweet samples with at least `min_words` input tokens and at
/// least `min_profile_docs` profile documents. Order is preserved.
///
/// Defaults used by the pipeline are 10 and 10; thresholds of 0 keep
/// everything.
pub fn filter_tweet_dataset(
    d: &Dataset,
    min_words: usize,
    min_profile_docs: usize,
) -> Result<Dataset> {
    if d.task != TaskKind::TweetParaphrase {
        return Err(Error::Usage(format!(
            "filter_tweet_dataset requires the tweet task, got `{}`",
            d.task
        )));
    }
    let samples = d
        .samples
        .iter()
        .filter(|s| {
            tokenize(&s.input_text).len() >= min_words
                && s.profile.documents.len() >= min_profile_docs
        })
        .cloned()
        .collect();
    Ok(Dataset {
        task: d.task,
        samples,
    })
}

/// Serialize a dataset back to the inline-output array form under the given
/// field map. `load_dataset` on the result yields an equal dataset.
pub fn dataset_to_json(d: &Dataset, map: &FieldMap) -> Value {
    let (title_field, body_field) = map.text_fields();
    let records: Vec<Value> = d
        .samples
        .iter()
        .map(|s| {
            let profile: Vec<Value> = s
                .profile
                .documents
                .iter()
                .map(|doc| {
                    let mut obj = Map::new();
                    obj.insert(map.id.clone(), Value::String(doc.id().to_string()));
                    match (title_field, doc.title()) {
                        (Some(tf), Some(title)) => {
                            obj.insert(tf.to_string(), Value::String(title.to_string()));
                            obj.insert(
                                body_field.to_string(),
                                Value::String(doc.body().to_string()),
                            );
                        }
                        _ => {
                            obj.insert(
                                body_field.to_string(),
                                Value::String(doc.body().to_string()),
                            );
                        }
                    }
                    Value::Object(obj)
                })
                .collect();
            let mut obj = Map::new();
            obj.insert(map.id.clone(), Value::String(s.id.clone()));
            obj.insert(map.input.clone(), Value::String(s.input_text.clone()));
            obj.insert(map.profile.clone(), Value::Array(profile));
            obj.insert(
                map.output.clone(),
                Value::String(s.reference_output.clone()),
            );
            Value::Object(obj)
        })
        .collect();
    Value::Array(records)
}

/// Write a dataset to disk in the inline-output array form.
pub fn save_dataset(d: &Dataset, map: &FieldMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(&dataset_to_json(d, map)).expect("json from values");
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_outputs(outputs: &[Value], map: &FieldMap) -> Result<HashMap<String, String>> {
    let mut by_id = HashMap::new();
    for (idx, entry) in outputs.iter().enumerate() {
        let obj = as_object(entry, idx)?;
        let label = record_label(obj, map, idx);
        let id = get_string(obj, &map.id, &label)?;
        let output = get_string(obj, &map.output, &label)?;
        by_id.insert(id, output);
    }
    Ok(by_id)
}

fn parse_records(
    records: &[Value],
    map: &FieldMap,
    outputs: Option<&HashMap<String, String>>,
) -> Result<Vec<Sample>> {
    records
        .iter()
        .enumerate()
        .map(|(idx, rec)| parse_record(rec, map, outputs, idx))
        .collect()
}

fn parse_record(
    rec: &Value,
    map: &FieldMap,
    outputs: Option<&HashMap<String, String>>,
    idx: usize,
) -> Result<Sample> {
    let obj = as_object(rec, idx)?;
    let label = record_label(obj, map, idx);

    let id = get_string(obj, &map.id, &label)?;
    if id.is_empty() {
        return Err(Error::Schema {
            record: label,
            field: map.id.clone(),
            message: "must be nonempty".to_string(),
        });
    }
    let input_text = get_nonempty_string(obj, &map.input, &label)?;

    let reference_output = match outputs {
        Some(by_id) => by_id
            .get(&id)
            .cloned()
            .ok_or_else(|| Error::Join { record: id.clone() })?,
        None => match obj.get(&map.output) {
            Some(Value::String(s)) => s.clone(),
            Some(_) => {
                return Err(Error::Schema {
                    record: label,
                    field: map.output.clone(),
                    message: "must be a string".to_string(),
                });
            }
            None => return Err(Error::Join { record: id.clone() }),
        },
    };
    if reference_output.is_empty() {
        return Err(Error::Schema {
            record: label,
            field: map.output.clone(),
            message: "must be nonempty".to_string(),
        });
    }

    let profile_val = obj.get(&map.profile).ok_or_else(|| Error::Schema {
        record: label.clone(),
        field: map.profile.clone(),
        message: "is missing".to_string(),
    })?;
    let entries = profile_val.as_array().ok_or_else(|| Error::Schema {
        record: label.clone(),
        field: map.profile.clone(),
        message: "must be an array".to_string(),
    })?;

    let (title_field, body_field) = map.text_fields();
    let mut documents = Vec::with_capacity(entries.len());
    for (doc_idx, entry) in entries.iter().enumerate() {
        let doc_obj = entry.as_object().ok_or_else(|| Error::Schema {
            record: label.clone(),
            field: map.profile.clone(),
            message: format!("entry #{doc_idx} must be an object"),
        })?;
        let doc_label = format!("{label}/profile#{doc_idx}");
        let doc_id = get_string(doc_obj, &map.id, &doc_label)?;
        let body = get_string(doc_obj, body_field, &doc_label)?;
        let title = match title_field {
            Some(tf) => Some(get_string(doc_obj, tf, &doc_label)?),
            None => None,
        };
        documents.push(Document::new(doc_id, title, body));
    }

    Ok(Sample {
        id: id.clone(),
        input_text,
        profile: UserProfile {
            user_id: id,
            documents,
        },
        reference_output,
    })
}

fn as_object(v: &Value, idx: usize) -> Result<&Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::Schema {
        record: format!("#{idx}"),
        field: "<record>".to_string(),
        message: "must be an object".to_string(),
    })
}

fn record_label(obj: &Map<String, Value>, map: &FieldMap, idx: usize) -> String {
    obj.get(&map.id)
        .and_then(Value::as_str)
        .map(str::to_string)
        .unwrap_or_else(|| format!("#{idx}"))
}

fn get_string(obj: &Map<String, Value>, field: &str, record: &str) -> Result<String> {
    match obj.get(field) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(Error::Schema {
            record: record.to_string(),
            field: field.to_string(),
            message: "must be a string".to_string(),
        }),
        None => Err(Error::Schema {
            record: record.to_string(),
            field: field.to_string(),
            message: "is missing".to_string(),
        }),
    }
}

fn get_nonempty_string(obj: &Map<String, Value>, field: &str, record: &str) -> Result<String> {
    let s = get_string(obj, field, record)?;
    if s.is_empty() {
        return Err(Error::Schema {
            record: record.to_string(),
            field: field.to_string(),
            message: "must be nonempty".to_string(),
        });
    }
    Ok(s)
}
