//! Prompt builders for the two value-extraction styles.

use std::collections::BTreeMap;

use crate::discovery::FeatureSpec;

use super::{ExtractionPrompt, GenerationError};

/// Build a one-feature prompt: a categorization-assistant instruction that
/// asks for a plain-JSON answer of the shape `{"<column>": "<value>"}`.
pub fn build_single_feature_prompt(
    spec: &FeatureSpec,
    text: &str,
    row_id: &str,
) -> Result<ExtractionPrompt, GenerationError> {
    if text.trim().is_empty() {
        return Err(GenerationError::Prompt(format!(
            "row `{row_id}`: text is empty"
        )));
    }
    let column = spec.column_name();
    let mut body = String::new();
    body.push_str(
        "You are a categorization assistant. Your job will be to assign a certain \
         characteristic to a text based on its content.\n\n",
    );
    body.push_str(&format!("In this instance: {}\n\n", spec.extraction_query));
    if !spec.description.is_empty() {
        body.push_str(&format!("{}\n\n", spec.description));
    }
    if spec.is_categorical() {
        body.push_str(&format!(
            "You will choose between {} values: {}.\n\n",
            spec.possible_values.len(),
            spec.possible_values.join(", ")
        ));
    }
    body.push_str(&format!(
        "Be concise, no explanation is to be provided. Your answer will consist of \
         an answer in plain json format and nothing else like so:\n\n\
         {{\n    \"{column}\": \"value\"\n}}\n\n\
         Text to be evaluated:\n{text}"
    ));

    let mut expected_schema = BTreeMap::new();
    if spec.is_categorical() {
        expected_schema.insert(spec.feature_name.clone(), spec.possible_values.clone());
    }
    Ok(ExtractionPrompt {
        feature_names: vec![spec.feature_name.clone()],
        body,
        row_id: row_id.to_string(),
        expected_schema,
    })
}

/// Build an all-features prompt: a JSON task object listing every feature's
/// extraction query, expecting `{"features": [{"feature_name", "answer"}]}`
/// back.
pub fn build_multi_feature_prompt(
    specs: &[FeatureSpec],
    text: &str,
    row_id: &str,
) -> Result<ExtractionPrompt, GenerationError> {
    if specs.is_empty() {
        return Err(GenerationError::Prompt("no feature specs given".into()));
    }
    if text.trim().is_empty() {
        return Err(GenerationError::Prompt(format!(
            "row `{row_id}`: text is empty"
        )));
    }
    {
        let mut seen = std::collections::BTreeSet::new();
        for spec in specs {
            if !seen.insert(&spec.feature_name) {
                return Err(GenerationError::Prompt(format!(
                    "duplicate feature name `{}`",
                    spec.feature_name
                )));
            }
        }
    }

    let features: Vec<serde_json::Value> = specs
        .iter()
        .map(|s| {
            serde_json::json!({
                "feature_name": s.feature_name,
                "description": s.description,
                "extraction_query": s.extraction_query,
            })
        })
        .collect();
    let root = serde_json::json!({
        "input_text": text,
        "task": "Extract the following features as described below and return a valid JSON object.",
        "constraints": [
            "The output must be a valid JSON.",
            "All answers must be simple and correspond to categorical values only."
        ],
        "features": features,
        "output_format": {
            "type": "json",
            "structure": {
                "features": [
                    {
                        "feature_name": "<Feature Name>",
                        "answer": "<Extracted Answer>"
                    }
                ]
            }
        }
    });

    let expected_schema: BTreeMap<String, Vec<String>> = specs
        .iter()
        .filter(|s| s.is_categorical())
        .map(|s| (s.feature_name.clone(), s.possible_values.clone()))
        .collect();
    Ok(ExtractionPrompt {
        feature_names: specs.iter().map(|s| s.feature_name.clone()).collect(),
        body: serde_json::to_string_pretty(&root).expect("prompt serializes"),
        row_id: row_id.to_string(),
        expected_schema,
    })
}
