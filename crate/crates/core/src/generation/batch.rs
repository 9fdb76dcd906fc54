//! JSONL batch files: request emission and result ingestion.
//!
//! Request lines follow the chat-completion batch convention:
//! `{"custom_id", "method": "POST", "url": "/v1/chat/completions", "body"}`.
//! Result lines carry `{"custom_id", "response": {"status_code", "body"}}`
//! with the content at `body.choices[0].message.content`; a minimal
//! `{"custom_id", "content"}` shape is also accepted.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use super::{GenerationError, LlmRequest, LlmResponse, Message, ResponseStatus};

/// Default maximum requests per batch file.
pub const DEFAULT_BATCH_FILE_CAP: usize = 600;

/// Write requests to one JSONL file; returns the number of lines written.
/// Duplicate custom ids are rejected before anything is written.
pub fn emit_batch_file(
    requests: &[LlmRequest],
    path: impl AsRef<Path>,
) -> Result<usize, GenerationError> {
    check_unique(requests)?;
    let mut file = std::io::BufWriter::new(std::fs::File::create(path.as_ref())?);
    for request in requests {
        let line = serde_json::json!({
            "custom_id": request.custom_id,
            "method": "POST",
            "url": "/v1/chat/completions",
            "body": {
                "model": request.model,
                "messages": request.messages,
                "temperature": request.temperature,
                "top_p": request.top_p,
            }
        });
        writeln!(file, "{line}")?;
    }
    file.flush()?;
    Ok(requests.len())
}

/// Split requests into files of at most `cap` lines, named
/// `<stem>-NNN.jsonl` under `dir`. Returns (path, line count) per file in
/// order; an empty request list produces no files.
pub fn emit_batch_files(
    requests: &[LlmRequest],
    dir: impl AsRef<Path>,
    stem: &str,
    cap: usize,
) -> Result<Vec<(PathBuf, usize)>, GenerationError> {
    assert!(cap >= 1, "cap must be at least 1");
    check_unique(requests)?;
    let dir = dir.as_ref();
    let mut out = Vec::new();
    for (i, chunk) in requests.chunks(cap).enumerate() {
        let path = dir.join(format!("{stem}-{:03}.jsonl", i + 1));
        emit_batch_file(chunk, &path)?;
        out.push((path, chunk.len()));
    }
    Ok(out)
}

fn check_unique(requests: &[LlmRequest]) -> Result<(), GenerationError> {
    let mut seen = std::collections::BTreeSet::new();
    for r in requests {
        if !seen.insert(&r.custom_id) {
            return Err(GenerationError::DuplicateCustomId(r.custom_id.clone()));
        }
    }
    Ok(())
}

/// Parse a request JSONL file back into requests (the emit inverse).
pub fn parse_batch_requests(path: impl AsRef<Path>) -> Result<Vec<LlmRequest>, GenerationError> {
    let file = std::io::BufReader::new(std::fs::File::open(path.as_ref())?);
    let mut out = Vec::new();
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| {
            GenerationError::Config(format!("request line {}: {e}", i + 1))
        })?;
        let custom_id = value["custom_id"]
            .as_str()
            .ok_or_else(|| {
                GenerationError::Config(format!("request line {}: missing custom_id", i + 1))
            })?
            .to_string();
        let body = &value["body"];
        let messages: Vec<Message> = serde_json::from_value(body["messages"].clone())
            .map_err(|e| GenerationError::Config(format!("request line {}: {e}", i + 1)))?;
        out.push(LlmRequest {
            custom_id,
            model: body["model"].as_str().unwrap_or_default().to_string(),
            temperature: body["temperature"].as_f64().unwrap_or(0.0),
            top_p: body["top_p"].as_f64().unwrap_or(1.0),
            deterministic_sampling: false,
            messages,
        });
    }
    Ok(out)
}

/// Parsed results plus the lines that could not be parsed.
#[derive(Debug, Clone)]
pub struct BatchIngest {
    pub responses: Vec<LlmResponse>,
    /// (1-based line number, problem description)
    pub malformed: Vec<(usize, String)>,
}

/// Read a results JSONL file. Malformed lines are reported with their line
/// numbers and never silently dropped.
pub fn ingest_batch_results(path: impl AsRef<Path>) -> Result<BatchIngest, GenerationError> {
    let file = std::io::BufReader::new(std::fs::File::open(path.as_ref())?);
    let mut responses = Vec::new();
    let mut malformed = Vec::new();
    for (i, line) in file.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(e) => {
                malformed.push((line_no, format!("invalid JSON: {e}")));
                continue;
            }
        };
        let Some(custom_id) = value["custom_id"].as_str().map(|s| s.to_string()) else {
            malformed.push((line_no, "missing custom_id".into()));
            continue;
        };
        responses.push(parse_result_object(custom_id, &value));
    }
    Ok(BatchIngest {
        responses,
        malformed,
    })
}

fn parse_result_object(custom_id: String, value: &serde_json::Value) -> LlmResponse {
    if let Some(err) = value.get("error").filter(|e| !e.is_null()) {
        return LlmResponse::transport_error(custom_id, err.to_string());
    }
    if let Some(response) = value.get("response").filter(|r| !r.is_null()) {
        let status = response["status_code"].as_i64().unwrap_or(200);
        if status != 200 {
            return LlmResponse::transport_error(custom_id, format!("status_code {status}"));
        }
        let message = &response["body"]["choices"][0]["message"];
        if message
            .get("refusal")
            .map(|r| !r.is_null())
            .unwrap_or(false)
        {
            return LlmResponse {
                custom_id,
                content: String::new(),
                status: ResponseStatus::Refused,
                error: message["refusal"].as_str().map(|s| s.to_string()),
            };
        }
        if let Some(content) = message["content"].as_str() {
            return LlmResponse::ok(custom_id, content);
        }
        return LlmResponse::transport_error(custom_id, "no message content");
    }
    if let Some(content) = value["content"].as_str() {
        return LlmResponse::ok(custom_id, content);
    }
    LlmResponse::transport_error(custom_id, "neither response body nor content")
}

/// Serialize a result line in the batch result shape. Used to synthesize
/// result files (tests, recorded runs).
pub fn result_line(custom_id: &str, content: &str) -> String {
    serde_json::json!({
        "custom_id": custom_id,
        "response": {
            "status_code": 200,
            "body": {
                "choices": [{"message": {"role": "assistant", "content": content}}]
            }
        },
        "error": null
    })
    .to_string()
}
