//! Response validation and table attachment.
//!
//! Response content is located by stripping markdown fences and extracting
//! the first balanced JSON object (models wrap JSON in prose despite the
//! plain-json instruction). Values are checked against each feature's value
//! space; the policy decides what happens to out-of-space values.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::discovery::{strip_fences, FeatureSpec};
use crate::tabular::{AugmentedTable, Cell, Column, ColumnKind};
use crate::util::snake_case;

use super::{
    split_custom_id, GenerationError, GenerationReport, LlmResponse, ResponseStatus,
    MULTI_PROMPT_TAG,
};

/// Out-of-space value handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Any out-of-space value marks the whole row invalid and the row is
    /// dropped from the returned table.
    Strict,
    /// Case/whitespace-normalized matches are accepted; unmatched values
    /// become `Other` when the spec has that fallback, else missing. Rows
    /// are never dropped.
    Coerce,
}

/// One out-of-space or unparseable value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvalidDetail {
    pub row_id: String,
    pub feature: String,
    pub value: String,
}

/// A response that produced no values (refusal or transport failure).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseIssue {
    pub row_id: String,
    pub tag: String,
    pub message: String,
}

/// Validate responses against the specs and attach one column per spec.
///
/// Every response's custom id must name a known row. Categorical specs
/// produce categorical columns over their value space; free-form specs
/// produce text columns. Rows without a response keep missing cells and
/// stay valid.
pub fn validate_and_attach(
    responses: &[LlmResponse],
    specs: &[FeatureSpec],
    table: &AugmentedTable,
    policy: Policy,
) -> Result<(AugmentedTable, GenerationReport), GenerationError> {
    for spec in specs {
        if table.column(&spec.column_name()).is_some() {
            return Err(GenerationError::Config(format!(
                "table already has a column named `{}`",
                spec.column_name()
            )));
        }
    }
    {
        let mut seen = std::collections::BTreeSet::new();
        for r in responses {
            if !seen.insert(&r.custom_id) {
                return Err(GenerationError::DuplicateCustomId(r.custom_id.clone()));
            }
        }
    }

    let n = table.n_rows();
    // per-row, per-column outcome
    let mut values: Vec<BTreeMap<String, String>> = vec![BTreeMap::new(); n];
    let mut row_invalid = vec![false; n];
    let mut details_by_row: Vec<Vec<InvalidDetail>> = vec![Vec::new(); n];
    let mut issues_by_row: Vec<Vec<ResponseIssue>> = vec![Vec::new(); n];

    for response in responses {
        let (row_id, tag) = split_custom_id(&response.custom_id).ok_or_else(|| {
            GenerationError::Config(format!(
                "custom_id `{}` is not of the form <row>|<tag>",
                response.custom_id
            ))
        })?;
        let row = table
            .row_index(row_id)
            .ok_or_else(|| GenerationError::UnknownRow(row_id.to_string()))?;
        if tag != MULTI_PROMPT_TAG && !specs.iter().any(|s| s.column_name() == tag) {
            return Err(GenerationError::Config(format!(
                "custom_id tag `{tag}` matches no feature"
            )));
        }

        match response.status {
            ResponseStatus::Ok => {}
            ResponseStatus::Refused | ResponseStatus::TransportError => {
                issues_by_row[row].push(ResponseIssue {
                    row_id: row_id.to_string(),
                    tag: tag.to_string(),
                    message: response
                        .error
                        .clone()
                        .unwrap_or_else(|| format!("{:?}", response.status)),
                });
                continue;
            }
        }

        let Some(object) = extract_json_object(&response.content) else {
            row_invalid[row] = true;
            details_by_row[row].push(InvalidDetail {
                row_id: row_id.to_string(),
                feature: tag.to_string(),
                value: format!("<non-json content: {}>", truncate(&response.content, 80)),
            });
            continue;
        };

        for (key, raw) in feature_entries(&object) {
            let Some(spec) = specs
                .iter()
                .find(|s| s.feature_name == key || s.column_name() == snake_case(&key))
            else {
                continue; // extra keys the model invented
            };
            let column = spec.column_name();
            if values[row].contains_key(&column) {
                return Err(GenerationError::Config(format!(
                    "row `{row_id}`: feature `{column}` assigned by more than one response"
                )));
            }
            match check_value(spec, &raw, policy) {
                Checked::Value(v) => {
                    values[row].insert(column, v);
                }
                Checked::Missing => {}
                Checked::OutOfSpace => {
                    details_by_row[row].push(InvalidDetail {
                        row_id: row_id.to_string(),
                        feature: spec.feature_name.clone(),
                        value: raw.clone(),
                    });
                    match policy {
                        Policy::Strict => row_invalid[row] = true,
                        Policy::Coerce => {
                            row_invalid[row] = true;
                            if spec.has_other_fallback() {
                                values[row].insert(column, "Other".into());
                            }
                        }
                    }
                }
            }
        }
    }

    // attach columns in spec order
    let mut augmented = table.clone();
    for spec in specs {
        let column_name = spec.column_name();
        let column = if spec.is_categorical() {
            let kind = if spec.possible_values.len() == 2 {
                ColumnKind::Binary
            } else {
                ColumnKind::Categorical
            };
            let cells = (0..n)
                .map(|row| match values[row].get(&column_name) {
                    Some(v) => {
                        let idx = spec
                            .possible_values
                            .iter()
                            .position(|c| c == v)
                            .expect("validated value is in the value space");
                        Cell::Category(idx as u32)
                    }
                    None => Cell::Missing,
                })
                .collect();
            Column {
                name: column_name,
                kind,
                categories: spec.possible_values.clone(),
                cells,
            }
        } else {
            let raw: Vec<Option<String>> =
                (0..n).map(|row| values[row].get(&column_name).cloned()).collect();
            let refs: Vec<Option<&str>> = raw.iter().map(|v| v.as_deref()).collect();
            Column::text(column_name, &refs)
        };
        augmented = augmented.with_column(column)?;
    }

    let invalid_rows: Vec<usize> = (0..n).filter(|&r| row_invalid[r]).collect();
    let rows_invalid = invalid_rows.len();
    let final_table = match policy {
        Policy::Strict => {
            let keep: Vec<usize> = (0..n).filter(|&r| !row_invalid[r]).collect();
            augmented.subset(&keep)
        }
        Policy::Coerce => augmented,
    };

    let report = GenerationReport {
        rows_total: n,
        rows_valid: n - rows_invalid,
        rows_invalid,
        policy,
        invalid_details: details_by_row.into_iter().flatten().collect(),
        response_errors: issues_by_row.into_iter().flatten().collect(),
    };
    Ok((final_table, report))
}

enum Checked {
    Value(String),
    Missing,
    OutOfSpace,
}

fn check_value(spec: &FeatureSpec, raw: &str, policy: Policy) -> Checked {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Checked::Missing;
    }
    if !spec.is_categorical() {
        return Checked::Value(trimmed.to_string());
    }
    if spec.possible_values.iter().any(|v| v == trimmed) {
        return Checked::Value(trimmed.to_string());
    }
    if policy == Policy::Coerce {
        let folded = trimmed.to_lowercase();
        if let Some(canonical) = spec
            .possible_values
            .iter()
            .find(|v| v.trim().to_lowercase() == folded)
        {
            return Checked::Value(canonical.clone());
        }
    }
    Checked::OutOfSpace
}

/// Feature/value pairs from a response object: either the
/// `{"features": [{"feature_name", "answer"}]}` shape or a flat
/// `{"<feature>": "<value>"}` object.
fn feature_entries(object: &Value) -> Vec<(String, String)> {
    if let Some(features) = object.get("features").and_then(Value::as_array) {
        return features
            .iter()
            .filter_map(|entry| {
                let name = entry.get("feature_name")?.as_str()?.to_string();
                let answer = entry.get("answer").map(value_to_string)?;
                Some((name, answer))
            })
            .collect();
    }
    match object.as_object() {
        Some(map) => map
            .iter()
            .map(|(k, v)| (k.clone(), value_to_string(v)))
            .collect(),
        None => Vec::new(),
    }
}

fn value_to_string(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Extract the first balanced, parseable JSON object from free text.
pub fn extract_json_object(content: &str) -> Option<Value> {
    let text = strip_fences(content);
    let bytes = text.as_bytes();
    let mut start = 0;
    while let Some(offset) = text[start..].find('{') {
        let open = start + offset;
        if let Some(end) = balanced_end(bytes, open) {
            if let Ok(value) = serde_json::from_str::<Value>(&text[open..=end]) {
                return Some(value);
            }
        }
        start = open + 1;
    }
    None
}

fn balanced_end(bytes: &[u8], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(open) {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn truncate(s: &str, max: usize) -> String {
    if s.len() <= max {
        s.to_string()
    } else {
        let mut end = max;
        while !s.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}...", &s[..end])
    }
}
