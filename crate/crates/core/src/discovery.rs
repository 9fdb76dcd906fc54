//! Automatic feature discovery: builds the discovery prompt from dataset
//! metadata plus sampled example rows, and parses the model's JSON answer
//! into validated feature specs.
//!
//! The prompt is a JSON template with `$name`, `$description`, `$target` and
//! `$examples` placeholders. The default template ships with the crate
//! ([`DEFAULT_PROMPT_TEMPLATE`]) and can be overridden by a file with the
//! same placeholder contract. The expected answer shape is
//! `{"features": [{feature_name, description, possible_values,
//! extraction_query}]}` and spec files persist in exactly that shape.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::util::snake_case;

/// The built-in discovery prompt template.
pub const DEFAULT_PROMPT_TEMPLATE: &str = include_str!("../data/discovery_prompt.json");

/// Cap on a feature's category count before an `Other` fallback is forced.
pub const DEFAULT_MAX_CATEGORIES: usize = 15;

#[derive(Debug, thiserror::Error)]
pub enum DiscoveryError {
    #[error("template error: {0}")]
    Template(String),
    #[error("response is not valid JSON at line {line}, column {column}: {msg}")]
    Json {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("feature {index}: {msg}")]
    Validation { index: usize, msg: String },
    #[error("response contains no features")]
    Empty,
    #[error("duplicate feature name `{0}`")]
    DuplicateName(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Dataset metadata fed into the discovery prompt.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub name: String,
    pub description: String,
    pub text_column: String,
    pub target_column: String,
    pub target_definition: String,
    /// (text, target) pairs available for sampling into the prompt.
    pub example_rows: Vec<(String, String)>,
}

/// One extractable feature: its name, value space and extraction query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub feature_name: String,
    pub description: String,
    /// Allowed categorical values in listed order. Empty means the feature
    /// is free-form (e.g. a date or a code) and no value-space check applies.
    pub possible_values: Vec<String>,
    pub extraction_query: String,
}

impl FeatureSpec {
    /// snake_case identifier used as the table column name.
    pub fn column_name(&self) -> String {
        snake_case(&self.feature_name)
    }

    pub fn is_categorical(&self) -> bool {
        !self.possible_values.is_empty()
    }

    /// Whether the value space carries an `Other` fallback category.
    pub fn has_other_fallback(&self) -> bool {
        self.possible_values.iter().any(|v| v == "Other")
    }
}

/// Instantiated discovery prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscoveryPrompt {
    pub system_message: String,
    /// The full instantiated template, serialized as pretty JSON.
    pub body: String,
    pub sample_count: usize,
}

/// Build the discovery prompt from metadata and `sample_size` example rows.
///
/// Rows are sampled without replacement from `meta.example_rows` with a
/// ChaCha8 stream seeded by `seed`, keeping their original relative order,
/// so identical inputs give byte-identical prompts.
pub fn build_discovery_prompt(
    meta: &DatasetMeta,
    sample_size: usize,
    seed: u64,
) -> Result<DiscoveryPrompt, DiscoveryError> {
    build_discovery_prompt_with_template(meta, sample_size, seed, DEFAULT_PROMPT_TEMPLATE)
}

/// [`build_discovery_prompt`] with a caller-supplied template.
pub fn build_discovery_prompt_with_template(
    meta: &DatasetMeta,
    sample_size: usize,
    seed: u64,
    template: &str,
) -> Result<DiscoveryPrompt, DiscoveryError> {
    if sample_size == 0 {
        return Err(DiscoveryError::Template(
            "sample_size must be at least 1 (the template requires examples)".into(),
        ));
    }
    if sample_size > meta.example_rows.len() {
        return Err(DiscoveryError::Template(format!(
            "sample_size {} exceeds available rows {}",
            sample_size,
            meta.example_rows.len()
        )));
    }

    let mut indices: Vec<usize> = (0..meta.example_rows.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let mut chosen: Vec<usize> = indices[..sample_size].to_vec();
    chosen.sort_unstable();
    let examples: Vec<Value> = chosen
        .iter()
        .map(|&i| {
            let (text, target) = &meta.example_rows[i];
            serde_json::json!({ "text": text, "target": target })
        })
        .collect();

    let mut root: Value = serde_json::from_str(template)
        .map_err(|e| DiscoveryError::Template(format!("template is not valid JSON: {e}")))?;
    substitute(
        &mut root,
        &meta.name,
        &meta.description,
        &format!("{} - {}", meta.target_column, meta.target_definition),
        &Value::Array(examples),
    );
    if let Some(left) = find_placeholder(&root) {
        return Err(DiscoveryError::Template(format!(
            "unsubstituted placeholder `{left}` remains in the template"
        )));
    }

    let system_message = root
        .get("system_message")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
    let body = serde_json::to_string_pretty(&root).expect("json value serializes");
    Ok(DiscoveryPrompt {
        system_message,
        body,
        sample_count: sample_size,
    })
}

fn substitute(value: &mut Value, name: &str, description: &str, target: &str, examples: &Value) {
    match value {
        Value::String(s) => {
            if s == "$examples" {
                *value = examples.clone();
            } else if s.contains('$') {
                let replaced = s
                    .replace("$name", name)
                    .replace("$description", description)
                    .replace("$target", target);
                *value = Value::String(replaced);
            }
        }
        Value::Array(items) => {
            for item in items {
                substitute(item, name, description, target, examples);
            }
        }
        Value::Object(map) => {
            for (_, v) in map.iter_mut() {
                substitute(v, name, description, target, examples);
            }
        }
        _ => {}
    }
}

fn find_placeholder(value: &Value) -> Option<String> {
    match value {
        Value::String(s) => {
            for p in ["$name", "$description", "$target", "$examples"] {
                if s.contains(p) {
                    return Some(p.to_string());
                }
            }
            None
        }
        Value::Array(items) => items.iter().find_map(find_placeholder),
        Value::Object(map) => map.values().find_map(find_placeholder),
        _ => None,
    }
}

/// Parse an LLM discovery response into validated feature specs.
///
/// Markdown fences are stripped; the JSON itself must be strictly valid (no
/// trailing commas, no single quotes — defects are errors, not repaired).
/// Feature names must be unique, also after snake_case normalization.
pub fn parse_feature_specs(raw: &str) -> Result<Vec<FeatureSpec>, DiscoveryError> {
    let body = strip_fences(raw);
    let root: Value = serde_json::from_str(body).map_err(|e| DiscoveryError::Json {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| DiscoveryError::Validation {
            index: 0,
            msg: "top-level object must contain a `features` array".into(),
        })?;
    if features.is_empty() {
        return Err(DiscoveryError::Empty);
    }

    let mut specs = Vec::with_capacity(features.len());
    for (index, entry) in features.iter().enumerate() {
        specs.push(parse_one(entry, index)?);
    }

    let mut names = std::collections::BTreeSet::new();
    let mut columns = std::collections::BTreeSet::new();
    for spec in &specs {
        if !names.insert(spec.feature_name.clone()) {
            return Err(DiscoveryError::DuplicateName(spec.feature_name.clone()));
        }
        if !columns.insert(spec.column_name()) {
            return Err(DiscoveryError::DuplicateName(format!(
                "{} (column name collision)",
                spec.column_name()
            )));
        }
    }
    Ok(specs)
}

fn parse_one(entry: &Value, index: usize) -> Result<FeatureSpec, DiscoveryError> {
    let get_str = |key: &str| -> Result<String, DiscoveryError> {
        entry
            .get(key)
            .and_then(Value::as_str)
            .map(|s| s.to_string())
            .ok_or_else(|| DiscoveryError::Validation {
                index,
                msg: format!("missing required key `{key}`"),
            })
    };
    let feature_name = get_str("feature_name")?;
    if feature_name.trim().is_empty() {
        return Err(DiscoveryError::Validation {
            index,
            msg: "feature_name is empty".into(),
        });
    }
    let description = get_str("description")?;
    let extraction_query = get_str("extraction_query")?;
    if extraction_query.trim().is_empty() {
        return Err(DiscoveryError::Validation {
            index,
            msg: "extraction_query is empty".into(),
        });
    }
    let possible_values = match entry.get("possible_values") {
        None => {
            return Err(DiscoveryError::Validation {
                index,
                msg: "missing required key `possible_values`".into(),
            })
        }
        Some(Value::Array(vals)) => vals
            .iter()
            .map(|v| {
                v.as_str()
                    .map(|s| s.to_string())
                    .ok_or_else(|| DiscoveryError::Validation {
                        index,
                        msg: "possible_values entries must be strings".into(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => {
            return Err(DiscoveryError::Validation {
                index,
                msg: "possible_values must be an array".into(),
            })
        }
    };
    Ok(FeatureSpec {
        feature_name,
        description,
        possible_values,
        extraction_query,
    })
}

/// Strip a surrounding markdown code fence (with optional language tag).
pub fn strip_fences(raw: &str) -> &str {
    let trimmed = raw.trim();
    if let Some(rest) = trimmed.strip_prefix("```") {
        let rest = match rest.find('\n') {
            Some(idx) => &rest[idx + 1..],
            None => rest,
        };
        if let Some(inner) = rest.strip_suffix("```") {
            return inner.trim();
        }
    }
    trimmed
}

/// Enforce the category cap: a spec with more than `max_categories` values
/// keeps the first `max_categories` (the model lists them by inferred
/// importance) and gains an appended `Other` fallback. Specs at or under the
/// cap are returned unchanged.
pub fn cap_categories(spec: &FeatureSpec, max_categories: usize) -> FeatureSpec {
    if spec.possible_values.len() <= max_categories {
        return spec.clone();
    }
    let mut possible_values: Vec<String> = spec.possible_values[..max_categories].to_vec();
    if !possible_values.iter().any(|v| v == "Other") {
        possible_values.push("Other".to_string());
    }
    FeatureSpec {
        feature_name: spec.feature_name.clone(),
        description: spec.description.clone(),
        possible_values,
        extraction_query: spec.extraction_query.clone(),
    }
}

/// Serialize specs in the persisted file shape: `{"features": [...]}`.
pub fn specs_to_json(specs: &[FeatureSpec]) -> String {
    let root = serde_json::json!({ "features": specs });
    serde_json::to_string_pretty(&root).expect("specs serialize") + "\n"
}

/// Load a spec file written by [`specs_to_json`] (or produced directly by a
/// discovery run).
pub fn load_specs(path: impl AsRef<std::path::Path>) -> Result<Vec<FeatureSpec>, DiscoveryError> {
    let text = std::fs::read_to_string(path)?;
    parse_feature_specs(&text)
}
