use std::time::Duration;

use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// One user turn: a text prompt and an optional PNG attached inline.
#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub prompt: String,
    pub image_png: Option<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EndpointError {
    /// Worth retrying: connection failures, timeouts, 429 and 5xx.
    #[error("transient endpoint error: {0}")]
    Transient(String),
    #[error("endpoint error: {0}")]
    Fatal(String),
}

/// Anything that answers a [`Request`] with text.
pub trait Endpoint: Sync {
    fn model_id(&self) -> &str;
    fn complete(&self, request: &Request) -> Result<String, EndpointError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    /// Delay before the second attempt; doubles after every further failure.
    pub backoff_base_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            backoff_base_ms: 500,
        }
    }
}

impl RetryPolicy {
    pub fn delay(&self, failed_attempts: u32) -> Duration {
        let factor = 1u64 << failed_attempts.saturating_sub(1).min(16);
        Duration::from_millis(self.backoff_base_ms.saturating_mul(factor))
    }
}

/// Calls `endpoint` until it succeeds, fails fatally, or attempts run out.
/// Returns the result together with the number of attempts made.
pub fn complete_with_retry(
    endpoint: &dyn Endpoint,
    request: &Request,
    policy: &RetryPolicy,
) -> (Result<String, EndpointError>, u32) {
    let mut attempt = 0;
    loop {
        attempt += 1;
        match endpoint.complete(request) {
            Err(EndpointError::Transient(msg)) if attempt < policy.max_attempts => {
                log::debug!("attempt {attempt} failed: {msg}");
                std::thread::sleep(policy.delay(attempt));
            }
            result => return (result, attempt),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointConfig {
    /// API root; requests go to `<base_url>/chat/completions`.
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the bearer token; `None` sends no auth.
    pub auth_env: Option<String>,
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
    pub timeout_secs: u64,
    pub temperature: f64,
    pub max_tokens: Option<u32>,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            base_url: "http://localhost:8000/v1".into(),
            model: String::new(),
            auth_env: Some("OPENAI_API_KEY".into()),
            max_in_flight: 4,
            retry: RetryPolicy::default(),
            timeout_secs: 120,
            temperature: 0.0,
            max_tokens: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EndpointConfigError {
    #[error("endpoint.{field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("environment variable `{0}` with the API token is not set")]
    MissingAuth(String),
    #[error("http client: {0}")]
    Client(String),
}

impl EndpointConfig {
    pub fn validate(&self) -> Result<(), EndpointConfigError> {
        let invalid = |field, reason: &str| {
            Err(EndpointConfigError::Invalid {
                field,
                reason: reason.to_string(),
            })
        };
        if self.model.trim().is_empty() {
            return invalid("model", "must not be empty");
        }
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return invalid("base_url", "must be an http(s) URL");
        }
        if self.max_in_flight < 1 {
            return invalid("max_in_flight", "must be at least 1");
        }
        if self.retry.max_attempts < 1 {
            return invalid("retry.max_attempts", "must be at least 1");
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return invalid("temperature", "must lie in [0, 2]");
        }
        Ok(())
    }

    /// Resolves the token; a configured but unset variable is an error.
    pub fn token(&self) -> Result<Option<String>, EndpointConfigError> {
        match &self.auth_env {
            None => Ok(None),
            Some(var) => match std::env::var(var) {
                Ok(t) if !t.is_empty() => Ok(Some(t)),
                _ => Err(EndpointConfigError::MissingAuth(var.clone())),
            },
        }
    }
}

/// Chat-completions client over blocking HTTP.
pub struct HttpEndpoint {
    config: EndpointConfig,
    token: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpEndpoint {
    /// Validates the config and resolves the token before any request is made.
    pub fn new(config: EndpointConfig) -> Result<Self, EndpointConfigError> {
        config.validate()?;
        let token = config.token()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| EndpointConfigError::Client(e.to_string()))?;
        Ok(HttpEndpoint {
            config,
            token,
            client,
        })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }
}

/// Request body in the chat-completions wire format.
pub fn request_body(model: &str, temperature: f64, max_tokens: Option<u32>, request: &Request) -> Value {
    let mut content = vec![json!({"type": "text", "text": request.prompt})];
    if let Some(png) = &request.image_png {
        let data = base64::engine::general_purpose::STANDARD.encode(png);
        content.push(json!({
            "type": "image_url",
            "image_url": {"url": format!("data:image/png;base64,{data}")}
        }));
    }
    let mut body = json!({
        "model": model,
        "temperature": temperature,
        "messages": [{"role": "user", "content": content}],
    });
    if let Some(n) = max_tokens {
        body["max_tokens"] = json!(n);
    }
    body
}

/// Assistant text from a chat-completions response body.
pub fn response_text(body: &Value) -> Result<String, EndpointError> {
    let content = &body["choices"][0]["message"]["content"];
    match content {
        Value::String(s) => Ok(s.clone()),
        // some servers return content parts
        Value::Array(parts) => Ok(parts
            .iter()
            .filter_map(|p| p["text"].as_str())
            .collect::<Vec<_>>()
            .join("")),
        _ => Err(EndpointError::Fatal("response has no choices[0].message.content".into())),
    }
}

impl Endpoint for HttpEndpoint {
    fn model_id(&self) -> &str {
        &self.config.model
    }

    fn complete(&self, request: &Request) -> Result<String, EndpointError> {
        let body = request_body(&self.config.model, self.config.temperature, self.config.max_tokens, request);
        let mut builder = self.client.post(self.url()).json(&body);
        if let Some(token) = &self.token {
            builder = builder.bearer_auth(token);
        }
        let response = builder
            .send()
            .map_err(|e| EndpointError::Transient(e.to_string()))?;
        let status = response.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(EndpointError::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            return Err(EndpointError::Fatal(format!("HTTP {status}: {}", text.trim())));
        }
        let value: Value = response
            .json()
            .map_err(|e| EndpointError::Fatal(format!("malformed response: {e}")))?;
        response_text(&value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};

    struct Flaky {
        failures: u32,
        calls: AtomicU32,
    }

    impl Endpoint for Flaky {
        fn model_id(&self) -> &str {
            "flaky"
        }
        fn complete(&self, _: &Request) -> Result<String, EndpointError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            if n < self.failures {
                Err(EndpointError::Transient("busy".into()))
            } else {
                Ok("ok".into())
            }
        }
    }

    fn quick(max_attempts: u32) -> RetryPolicy {
        RetryPolicy {
            max_attempts,
            backoff_base_ms: 0,
        }
    }

    #[test]
    fn retries_until_success() {
        let e = Flaky { failures: 2, calls: AtomicU32::new(0) };
        let (r, attempts) = complete_with_retry(&e, &Request { prompt: "x".into(), image_png: None }, &quick(3));
        assert_eq!(r.unwrap(), "ok");
        assert_eq!(attempts, 3);
    }

    #[test]
    fn gives_up_after_max_attempts() {
        let e = Flaky { failures: 5, calls: AtomicU32::new(0) };
        let (r, attempts) = complete_with_retry(&e, &Request { prompt: "x".into(), image_png: None }, &quick(2));
        assert!(matches!(r, Err(EndpointError::Transient(_))));
        assert_eq!(attempts, 2);
        assert_eq!(e.calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn backoff_doubles() {
        let p = RetryPolicy { max_attempts: 5, backoff_base_ms: 100 };
        let d: Vec<u64> = (1..=4).map(|i| p.delay(i).as_millis() as u64).collect();
        assert_eq!(d, [100, 200, 400, 800]);
    }

    #[test]
    fn body_carries_inline_image() {
        let body = request_body("m", 0.0, None, &Request { prompt: "hi".into(), image_png: Some(vec![1, 2, 3]) });
        assert_eq!(body["messages"][0]["content"][0]["text"], "hi");
        assert_eq!(body["messages"][0]["content"][1]["image_url"]["url"], "data:image/png;base64,AQID");
        assert_eq!(body["temperature"], 0.0);
    }

    #[test]
    fn config_validation() {
        let ok = EndpointConfig { model: "m".into(), ..EndpointConfig::default() };
        ok.validate().unwrap();
        assert!(EndpointConfig { max_in_flight: 0, ..ok.clone() }.validate().is_err());
        let no_retry = EndpointConfig { retry: quick(0), ..ok.clone() };
        assert!(no_retry.validate().is_err());
        assert!(EndpointConfig { model: "".into(), ..ok }.validate().is_err());
    }

    #[test]
    fn unset_token_variable_is_reported() {
        let c = EndpointConfig {
            model: "m".into(),
            auth_env: Some("V2R_TEST_SURELY_UNSET_TOKEN".into()),
            ..EndpointConfig::default()
        };
        assert!(matches!(HttpEndpoint::new(c), Err(EndpointConfigError::MissingAuth(_))));
    }
}
