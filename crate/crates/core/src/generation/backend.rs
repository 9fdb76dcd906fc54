//! LLM backends and bounded-parallel submission with retry.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use super::{GenerationError, LlmRequest, LlmResponse};

/// Backend failure classification: transient failures are retried, fatal
/// ones are surfaced immediately.
#[derive(Debug, Clone)]
pub enum BackendError {
    Transient(String),
    Fatal(String),
}

impl BackendError {
    pub fn message(&self) -> &str {
        match self {
            BackendError::Transient(m) | BackendError::Fatal(m) => m,
        }
    }
}

/// A chat-completion backend. Implementations must be shareable across
/// worker threads.
pub trait LlmBackend: Sync {
    fn name(&self) -> &str;
    fn complete(&self, request: &LlmRequest) -> Result<String, BackendError>;
}

/// Retry policy for transient transport failures: capped exponential backoff.
#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            base_delay: Duration::from_millis(200),
            max_delay: Duration::from_secs(2),
        }
    }
}

impl RetryPolicy {
    fn delay(&self, attempt: u32) -> Duration {
        let exp = self.base_delay.saturating_mul(1u32 << attempt.min(16));
        exp.min(self.max_delay)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SubmitOptions {
    /// Maximum requests in flight at once.
    pub parallelism: usize,
    pub retry: RetryPolicy,
}

impl Default for SubmitOptions {
    fn default() -> Self {
        SubmitOptions {
            parallelism: 4,
            retry: RetryPolicy::default(),
        }
    }
}

/// Send every request through the backend, at most `parallelism` in flight.
///
/// Results come back in request order, matched by custom id. Transient
/// failures are retried up to the policy's attempt count with capped
/// exponential backoff and then surfaced as transport-error responses;
/// fatal failures surface immediately.
pub fn submit(
    requests: &[LlmRequest],
    backend: &dyn LlmBackend,
    options: &SubmitOptions,
) -> Result<Vec<LlmResponse>, GenerationError> {
    {
        let mut seen = std::collections::BTreeSet::new();
        for r in requests {
            if !seen.insert(&r.custom_id) {
                return Err(GenerationError::DuplicateCustomId(r.custom_id.clone()));
            }
        }
    }
    let workers = options.parallelism.max(1).min(requests.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<LlmResponse>>> = Mutex::new(vec![None; requests.len()]);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= requests.len() {
                    break;
                }
                let response = run_one(&requests[idx], backend, &options.retry);
                results.lock().unwrap()[idx] = Some(response);
            });
        }
    });

    Ok(results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every request produced a response"))
        .collect())
}

fn run_one(request: &LlmRequest, backend: &dyn LlmBackend, retry: &RetryPolicy) -> LlmResponse {
    let mut last_error = String::new();
    for attempt in 0..retry.attempts.max(1) {
        match backend.complete(request) {
            Ok(content) => return LlmResponse::ok(&request.custom_id, content),
            Err(BackendError::Fatal(msg)) => {
                return LlmResponse::transport_error(&request.custom_id, msg)
            }
            Err(BackendError::Transient(msg)) => {
                last_error = msg;
                if attempt + 1 < retry.attempts {
                    std::thread::sleep(retry.delay(attempt));
                }
            }
        }
    }
    LlmResponse::transport_error(
        &request.custom_id,
        format!("{last_error} (after {} attempts)", retry.attempts),
    )
}

/// Deterministic offline backend: a fixture map from custom id to response
/// content. Requests without a fixture fail fatally (they surface as
/// transport errors). Every served custom id is recorded in a call log, so
/// tests can assert that no other backend was touched.
pub struct MockBackend {
    fixtures: BTreeMap<String, String>,
    calls: Mutex<Vec<String>>,
}

impl MockBackend {
    pub fn new(fixtures: BTreeMap<String, String>) -> Self {
        MockBackend {
            fixtures,
            calls: Mutex::new(Vec::new()),
        }
    }

    /// Load a fixture file: a JSON object mapping custom id to content.
    /// String values are used verbatim; other values are serialized, which
    /// lets fixtures hold response objects directly.
    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self, GenerationError> {
        let text = std::fs::read_to_string(path)?;
        let root: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| GenerationError::Config(format!("mock fixture is not valid JSON: {e}")))?;
        let obj = root
            .as_object()
            .ok_or_else(|| GenerationError::Config("mock fixture must be a JSON object".into()))?;
        let fixtures = obj
            .iter()
            .map(|(k, v)| {
                let content = match v {
                    serde_json::Value::String(s) => s.clone(),
                    other => serde_json::to_string(other).expect("json value serializes"),
                };
                (k.clone(), content)
            })
            .collect();
        Ok(MockBackend::new(fixtures))
    }

    pub fn call_log(&self) -> Vec<String> {
        self.calls.lock().unwrap().clone()
    }
}

impl LlmBackend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, request: &LlmRequest) -> Result<String, BackendError> {
        self.calls.lock().unwrap().push(request.custom_id.clone());
        self.fixtures
            .get(&request.custom_id)
            .cloned()
            .ok_or_else(|| {
                BackendError::Fatal(format!("no fixture for custom_id `{}`", request.custom_id))
            })
    }
}

/// Configuration for the live HTTPS chat-completion backend.
#[derive(Debug, Clone)]
pub struct HttpBackendConfig {
    pub endpoint: String,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    pub timeout: Duration,
}

impl Default for HttpBackendConfig {
    fn default() -> Self {
        HttpBackendConfig {
            endpoint: String::new(),
            api_key_env: "LLM_API_KEY".into(),
            timeout: Duration::from_secs(120),
        }
    }
}

/// Live chat-completion backend over HTTPS. Construction validates the
/// configuration (endpoint and credentials) before any network call.
pub struct HttpBackend {
    endpoint: String,
    api_key: String,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn from_config(config: &HttpBackendConfig) -> Result<Self, GenerationError> {
        if config.endpoint.trim().is_empty() {
            return Err(GenerationError::Config(
                "live backend requires an endpoint URL".into(),
            ));
        }
        let api_key = std::env::var(&config.api_key_env).map_err(|_| {
            GenerationError::Config(format!(
                "missing credentials: environment variable `{}` is not set",
                config.api_key_env
            ))
        })?;
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| GenerationError::Config(e.to_string()))?;
        Ok(HttpBackend {
            endpoint: config.endpoint.clone(),
            api_key,
            client,
        })
    }
}

impl LlmBackend for HttpBackend {
    fn name(&self) -> &str {
        "live"
    }

    fn complete(&self, request: &LlmRequest) -> Result<String, BackendError> {
        let body = serde_json::json!({
            "model": request.model,
            "messages": request.messages,
            "temperature": request.temperature,
            "top_p": request.top_p,
        });
        let response = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| {
                if e.is_timeout() || e.is_connect() {
                    BackendError::Transient(e.to_string())
                } else {
                    BackendError::Fatal(e.to_string())
                }
            })?;

        let status = response.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(BackendError::Transient(format!("http status {status}")));
        }
        if !status.is_success() {
            return Err(BackendError::Fatal(format!("http status {status}")));
        }
        let value: serde_json::Value = response
            .json()
            .map_err(|e| BackendError::Fatal(format!("invalid response body: {e}")))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(|s| s.to_string())
            .ok_or_else(|| BackendError::Fatal("response has no message content".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generation::{custom_id, Message, ResponseStatus};

    fn request(id: &str) -> LlmRequest {
        LlmRequest {
            custom_id: id.into(),
            model: "m".into(),
            temperature: 0.0,
            top_p: 0.9,
            deterministic_sampling: true,
            messages: vec![Message {
                role: "user".into(),
                content: "hi".into(),
            }],
        }
    }

    fn fast_options(parallelism: usize) -> SubmitOptions {
        SubmitOptions {
            parallelism,
            retry: RetryPolicy {
                attempts: 3,
                base_delay: Duration::from_millis(1),
                max_delay: Duration::from_millis(4),
            },
        }
    }

    #[test]
    fn mock_echoes_fixtures_and_logs_calls() {
        let backend = MockBackend::new(
            [("r0|rigor".to_string(), r#"{"rigor":"high"}"#.to_string())]
                .into_iter()
                .collect(),
        );
        let out = submit(&[request("r0|rigor")], &backend, &fast_options(2)).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].status, ResponseStatus::Ok);
        assert_eq!(out[0].content, r#"{"rigor":"high"}"#);
        assert_eq!(backend.call_log(), vec!["r0|rigor".to_string()]);
    }

    #[test]
    fn missing_fixture_is_transport_error() {
        let backend = MockBackend::new(BTreeMap::new());
        let out = submit(&[request("r0|rigor")], &backend, &fast_options(1)).unwrap();
        assert_eq!(out[0].status, ResponseStatus::TransportError);
        assert!(out[0].error.as_ref().unwrap().contains("no fixture"));
    }

    #[test]
    fn duplicate_custom_ids_rejected() {
        let backend = MockBackend::new(BTreeMap::new());
        let err = submit(
            &[request("a|x"), request("a|x")],
            &backend,
            &fast_options(1),
        )
        .unwrap_err();
        assert!(matches!(err, GenerationError::DuplicateCustomId(_)));
    }

    struct InstrumentedBackend {
        in_flight: AtomicUsize,
        max_in_flight: AtomicUsize,
    }

    impl LlmBackend for InstrumentedBackend {
        fn name(&self) -> &str {
            "instrumented"
        }
        fn complete(&self, _request: &LlmRequest) -> Result<String, BackendError> {
            let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
            self.max_in_flight.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(Duration::from_millis(20));
            self.in_flight.fetch_sub(1, Ordering::SeqCst);
            Ok("{}".into())
        }
    }

    #[test]
    fn parallelism_bound_is_honored() {
        let backend = InstrumentedBackend {
            in_flight: AtomicUsize::new(0),
            max_in_flight: AtomicUsize::new(0),
        };
        let requests: Vec<LlmRequest> =
            (0..3).map(|i| request(&custom_id(&format!("r{i}"), "f"))).collect();
        let out = submit(&requests, &backend, &fast_options(2)).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|r| r.status == ResponseStatus::Ok));
        let max = backend.max_in_flight.load(Ordering::SeqCst);
        assert!(max <= 2, "max in flight was {max}");
    }

    struct FlakyBackend {
        failures_left: AtomicUsize,
    }

    impl LlmBackend for FlakyBackend {
        fn name(&self) -> &str {
            "flaky"
        }
        fn complete(&self, _request: &LlmRequest) -> Result<String, BackendError> {
            if self
                .failures_left
                .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |v| v.checked_sub(1))
                .is_ok()
            {
                Err(BackendError::Transient("connection reset".into()))
            } else {
                Ok("ok".into())
            }
        }
    }

    #[test]
    fn transient_failures_are_retried_then_succeed() {
        let backend = FlakyBackend {
            failures_left: AtomicUsize::new(2),
        };
        let out = submit(&[request("a|x")], &backend, &fast_options(1)).unwrap();
        assert_eq!(out[0].status, ResponseStatus::Ok);
    }

    #[test]
    fn transient_failures_exhaust_into_transport_error() {
        let backend = FlakyBackend {
            failures_left: AtomicUsize::new(10),
        };
        let out = submit(&[request("a|x")], &backend, &fast_options(1)).unwrap();
        assert_eq!(out[0].status, ResponseStatus::TransportError);
        assert!(out[0].error.as_ref().unwrap().contains("3 attempts"));
    }

    #[test]
    fn live_backend_requires_credentials_before_any_network_call() {
        let config = HttpBackendConfig {
            endpoint: "https://example.invalid/v1/chat/completions".into(),
            api_key_env: "FEATMINE_TEST_KEY_THAT_IS_NOT_SET".into(),
            timeout: Duration::from_secs(1),
        };
        match HttpBackend::from_config(&config) {
            Err(GenerationError::Config(msg)) => assert!(msg.contains("missing credentials")),
            Err(other) => panic!("unexpected error {other:?}"),
            Ok(_) => panic!("construction should fail without credentials"),
        }
    }
}
