//! Minimal blocking client for OpenAI-compatible chat-completions endpoints.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Agent, AgentError, ChatMessage, Query, Reply, SimRng};
use crate::engine::TokenUsage;

pub const DEFAULT_API_KEY_ENV: &str = "COOPGYM_API_KEY";

const BODY_EXCERPT_CHARS: usize = 200;
const MAX_BACKOFF_MS: u64 = 8_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmSpec {
    /// Base URL; requests go to `{endpoint_url}/chat/completions`.
    pub endpoint_url: String,
    pub model_name: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_http_retries")]
    pub max_http_retries: u32,
    /// First retry delay; doubles per attempt up to 8 s.
    #[serde(default = "default_backoff")]
    pub retry_backoff_ms: u64,
    /// Environment variable holding the bearer token.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
}

fn default_temperature() -> f64 {
    0.7
}
fn default_max_tokens() -> u32 {
    2048
}
fn default_timeout() -> f64 {
    120.0
}
fn default_http_retries() -> u32 {
    3
}
fn default_backoff() -> u64 {
    500
}
fn default_key_env() -> String {
    DEFAULT_API_KEY_ENV.to_string()
}

impl LlmSpec {
    pub fn new(endpoint_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        Self {
            endpoint_url: endpoint_url.into(),
            model_name: model_name.into(),
            temperature: default_temperature(),
            max_tokens: default_max_tokens(),
            timeout_secs: default_timeout(),
            max_http_retries: default_http_retries(),
            retry_backoff_ms: default_backoff(),
            api_key_env: default_key_env(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(format!("temperature must be finite and >= 0, got {}", self.temperature));
        }
        if self.max_tokens == 0 {
            return Err("max_tokens must be positive".into());
        }
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return Err("timeout_secs must be positive".into());
        }
        if self.endpoint_url.trim().is_empty() {
            return Err("endpoint_url is empty".into());
        }
        Ok(())
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.endpoint_url.trim_end_matches('/'))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LlmError {
    #[error("request timed out")]
    Timeout,
    #[error("HTTP {code}: {body}")]
    HttpStatus { code: u16, body: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("transport error: {0}")]
    Transport(String),
}

impl LlmError {
    fn is_transient(&self) -> bool {
        match self {
            LlmError::Timeout | LlmError::Transport(_) => true,
            LlmError::HttpStatus { code, .. } => *code == 429 || *code >= 500,
            LlmError::MalformedResponse(_) => false,
        }
    }
}

fn excerpt(body: &str) -> String {
    body.chars().take(BODY_EXCERPT_CHARS).collect()
}

/// Pulls `choices[0].message.content` and usage counts out of a response body.
/// Reasoning fields next to `content` are ignored.
fn parse_completion(body: &str) -> Result<Reply, LlmError> {
    let v: Value = serde_json::from_str(body).map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
    let choice = v
        .get("choices")
        .and_then(Value::as_array)
        .and_then(|c| c.first())
        .ok_or_else(|| LlmError::MalformedResponse("no choices in response".into()))?;
    let content = choice
        .pointer("/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| LlmError::MalformedResponse("choice has no message content".into()))?;
    let usage = v.get("usage").map(|u| TokenUsage {
        prompt_tokens: u.get("prompt_tokens").and_then(Value::as_u64),
        completion_tokens: u.get("completion_tokens").and_then(Value::as_u64),
    });
    Ok(Reply { text: content.to_string(), usage: usage.unwrap_or_default() })
}

fn http_agent(spec: &LlmSpec) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs_f64(spec.timeout_secs)))
        .http_status_as_error(false)
        .build()
        .into()
}

fn send_once(agent: &ureq::Agent, spec: &LlmSpec, body: &Value, api_key: Option<&str>) -> Result<Reply, LlmError> {
    let mut req = agent.post(spec.url()).header("Content-Type", "application/json");
    if let Some(key) = api_key {
        req = req.header("Authorization", format!("Bearer {key}"));
    }
    let resp = req.send_json(body).map_err(|e| match e {
        ureq::Error::Timeout(_) => LlmError::Timeout,
        other => LlmError::Transport(other.to_string()),
    })?;
    let code = resp.status().as_u16();
    let text = resp.into_body().read_to_string().map_err(|e| match e {
        ureq::Error::Timeout(_) => LlmError::Timeout,
        other => LlmError::Transport(other.to_string()),
    })?;
    if !(200..300).contains(&code) {
        return Err(LlmError::HttpStatus { code, body: excerpt(&text) });
    }
    parse_completion(&text)
}

fn complete_with(agent: &ureq::Agent, spec: &LlmSpec, messages: &[ChatMessage]) -> Result<Reply, LlmError> {
    let body = json!({
        "model": spec.model_name,
        "messages": messages,
        "temperature": spec.temperature,
        "max_tokens": spec.max_tokens,
    });
    let api_key = std::env::var(&spec.api_key_env).ok().filter(|k| !k.is_empty());
    let mut attempt = 0;
    loop {
        match send_once(agent, spec, &body, api_key.as_deref()) {
            Err(e) if e.is_transient() && attempt < spec.max_http_retries => {
                let delay = spec.retry_backoff_ms.saturating_mul(1 << attempt.min(16)).min(MAX_BACKOFF_MS);
                thread::sleep(Duration::from_millis(delay));
                attempt += 1;
            }
            other => return other,
        }
    }
}

/// Sends one chat-completions request, retrying timeouts, transport errors,
/// 429 and 5xx responses up to `max_http_retries` times.
pub fn llm_complete(spec: &LlmSpec, messages: &[ChatMessage]) -> Result<Reply, LlmError> {
    complete_with(&http_agent(spec), spec, messages)
}

/// Agent backed by a chat-completions endpoint.
pub struct LlmAgent {
    spec: LlmSpec,
    http: ureq::Agent,
}

impl LlmAgent {
    pub fn new(spec: LlmSpec) -> Self {
        let http = http_agent(&spec);
        Self { spec, http }
    }
}

impl Agent for LlmAgent {
    fn respond(&self, query: &Query<'_>, _rng: &mut SimRng) -> Result<Reply, AgentError> {
        Ok(complete_with(&self.http, &self.spec, query.messages)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn content_is_returned_verbatim() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":" {\"effort\": 3} "}}]}"#;
        assert_eq!(parse_completion(body).unwrap().text, r#" {"effort": 3} "#);
    }

    #[test]
    fn reasoning_field_is_dropped() {
        let body = r#"{"choices":[{"message":{"content":"{\"extract\": 1}","reasoning_content":"{\"extract\": 9}"}}],
                      "usage":{"prompt_tokens":12,"completion_tokens":5}}"#;
        let reply = parse_completion(body).unwrap();
        assert_eq!(reply.text, r#"{"extract": 1}"#);
        assert_eq!(reply.usage, TokenUsage { prompt_tokens: Some(12), completion_tokens: Some(5) });
    }

    #[test]
    fn malformed_bodies() {
        assert!(matches!(parse_completion(r#"{"choices":[]}"#), Err(LlmError::MalformedResponse(_))));
        assert!(matches!(parse_completion("not json"), Err(LlmError::MalformedResponse(_))));
        assert!(matches!(
            parse_completion(r#"{"choices":[{"message":{"content":null}}]}"#),
            Err(LlmError::MalformedResponse(_))
        ));
    }

    #[test]
    fn transient_classification() {
        assert!(LlmError::HttpStatus { code: 429, body: String::new() }.is_transient());
        assert!(LlmError::HttpStatus { code: 503, body: String::new() }.is_transient());
        assert!(!LlmError::HttpStatus { code: 400, body: String::new() }.is_transient());
        assert!(LlmError::Timeout.is_transient());
    }

    #[test]
    fn url_joining() {
        assert_eq!(LlmSpec::new("http://h:1/v1/", "m").url(), "http://h:1/v1/chat/completions");
    }
}
