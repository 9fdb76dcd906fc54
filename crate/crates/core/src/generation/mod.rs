//! Per-row feature value generation through an LLM.
//!
//! Two prompt styles are supported: one prompt per (row, feature) asking for
//! a single value in plain JSON, and one prompt per row extracting all
//! features at once as a JSON object. Requests go to an [`LlmBackend`]
//! (a live HTTP endpoint or a deterministic mock), or are written to / read
//! from JSONL batch files. Responses are validated against each feature's
//! value space and attached to the table as new columns.

mod attach;
mod backend;
mod batch;
mod prompts;

pub use attach::{validate_and_attach, InvalidDetail, Policy, ResponseIssue};
pub use backend::{
    submit, BackendError, HttpBackend, HttpBackendConfig, LlmBackend, MockBackend, RetryPolicy,
    SubmitOptions,
};
pub use batch::{
    emit_batch_file, emit_batch_files, ingest_batch_results, parse_batch_requests, result_line,
    BatchIngest, DEFAULT_BATCH_FILE_CAP,
};
pub use prompts::{build_multi_feature_prompt, build_single_feature_prompt};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Tag used in custom ids of all-features-per-row prompts.
pub const MULTI_PROMPT_TAG: &str = "multi";

#[derive(Debug, thiserror::Error)]
pub enum GenerationError {
    #[error("prompt error: {0}")]
    Prompt(String),
    #[error("duplicate custom_id `{0}`")]
    DuplicateCustomId(String),
    #[error("response for unknown row `{0}`")]
    UnknownRow(String),
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("table error: {0}")]
    Table(#[from] crate::tabular::TableError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// An instantiated value-extraction prompt for one row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionPrompt {
    /// Features the prompt asks for (original feature names).
    pub feature_names: Vec<String>,
    pub body: String,
    pub row_id: String,
    /// feature name -> allowed values; free-form features are absent.
    pub expected_schema: BTreeMap<String, Vec<String>>,
}

/// One chat message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

/// Model settings attached to every request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RequestSettings {
    pub model: String,
    pub temperature: f64,
    pub top_p: f64,
    /// Greedy decoding requested (recorded for the manifest; enforcement is
    /// the backend's concern).
    pub deterministic_sampling: bool,
}

impl Default for RequestSettings {
    fn default() -> Self {
        RequestSettings {
            model: "default".into(),
            temperature: 0.0,
            top_p: 0.9,
            deterministic_sampling: true,
        }
    }
}

/// A single chat-completion request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LlmRequest {
    pub custom_id: String,
    pub model: String,
    pub temperature: f64,
    pub top_p: f64,
    pub deterministic_sampling: bool,
    pub messages: Vec<Message>,
}

impl LlmRequest {
    /// Request for an extraction prompt, with the custom id
    /// `<row_id>|<tag>` (tag = feature column or [`MULTI_PROMPT_TAG`]).
    pub fn from_prompt(prompt: &ExtractionPrompt, tag: &str, settings: &RequestSettings) -> Self {
        LlmRequest {
            custom_id: custom_id(&prompt.row_id, tag),
            model: settings.model.clone(),
            temperature: settings.temperature,
            top_p: settings.top_p,
            deterministic_sampling: settings.deterministic_sampling,
            messages: vec![Message {
                role: "user".into(),
                content: prompt.body.clone(),
            }],
        }
    }
}

/// Compose a custom id. Row ids never contain `|`.
pub fn custom_id(row_id: &str, tag: &str) -> String {
    format!("{row_id}|{tag}")
}

/// Split a custom id back into (row_id, tag).
pub fn split_custom_id(id: &str) -> Option<(&str, &str)> {
    id.split_once('|')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseStatus {
    Ok,
    Refused,
    TransportError,
}

/// A backend answer matched to its request by custom id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub custom_id: String,
    pub content: String,
    pub status: ResponseStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl LlmResponse {
    pub fn ok(custom_id: impl Into<String>, content: impl Into<String>) -> Self {
        let content = content.into();
        let status = if content.trim().is_empty() {
            ResponseStatus::Refused
        } else {
            ResponseStatus::Ok
        };
        LlmResponse {
            custom_id: custom_id.into(),
            content,
            status,
            error: None,
        }
    }

    pub fn transport_error(custom_id: impl Into<String>, message: impl Into<String>) -> Self {
        LlmResponse {
            custom_id: custom_id.into(),
            content: String::new(),
            status: ResponseStatus::TransportError,
            error: Some(message.into()),
        }
    }
}

/// Outcome tally of a validate-and-attach pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub rows_total: usize,
    pub rows_valid: usize,
    pub rows_invalid: usize,
    pub policy: Policy,
    /// Out-of-space or unparseable values, in table row order.
    pub invalid_details: Vec<InvalidDetail>,
    /// Refused or transport-failed responses (cells left missing).
    pub response_errors: Vec<ResponseIssue>,
}
