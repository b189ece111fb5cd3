//! Text-generation providers: a trait, an HTTP client and settings.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use super::prompt::PromptSpec;

pub const URL_ENV: &str = "PROVIDER_URL";
pub const KEY_ENV: &str = "PROVIDER_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("provider deadline exceeded")]
    Timeout,
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("unusable provider response: {0}")]
    BadResponse(String),
    #[error("provider not configured: {0}")]
    NotConfigured(String),
}

/// Single text-in, text-out call.
pub trait Provider: Send + Sync {
    fn name(&self) -> &str;
    fn generate(&self, prompt: &PromptSpec) -> Result<String, ProviderError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    #[default]
    Mock,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderSettings {
    pub kind: ProviderKind,
    pub model: String,
    /// JSON pointer to the generated text in a remote response.
    pub response_pointer: String,
    pub timeout_secs: f64,
    /// Extra request body fields (temperature and the like), passed through.
    pub params: Map<String, Value>,
    pub char_limit: usize,
    pub batch_limit: usize,
    pub max_retries: u32,
    pub backoff_ms: u64,
}

impl Default for ProviderSettings {
    fn default() -> Self {
        Self {
            kind: ProviderKind::Mock,
            model: String::new(),
            response_pointer: "/choices/0/message/content".to_string(),
            timeout_secs: 120.0,
            params: Map::new(),
            char_limit: 16_000,
            batch_limit: 20,
            max_retries: 3,
            backoff_ms: 500,
        }
    }
}

impl ProviderSettings {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(format!("provider.timeout_secs must be positive, got {}", self.timeout_secs));
        }
        if self.kind == ProviderKind::Remote && self.model.is_empty() {
            return Err("provider.model is required for a remote provider".into());
        }
        if self.batch_limit == 0 {
            return Err("provider.batch_limit must be at least 1".into());
        }
        if self.char_limit == 0 {
            return Err("provider.char_limit must be at least 1".into());
        }
        if !self.response_pointer.is_empty() && !self.response_pointer.starts_with('/') {
            return Err("provider.response_pointer must be empty or start with '/'".into());
        }
        for reserved in ["model", "messages"] {
            if self.params.contains_key(reserved) {
                return Err(format!("provider.params may not override `{reserved}`"));
            }
        }
        Ok(())
    }
}

/// Chat-style HTTP endpoint.
#[derive(Debug)]
pub struct RemoteProvider {
    url: String,
    key: Option<String>,
    settings: ProviderSettings,
    agent: ureq::Agent,
}

impl RemoteProvider {
    pub fn new(url: impl Into<String>, key: Option<String>, settings: ProviderSettings) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(settings.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            url: url.into(),
            key,
            settings,
            agent,
        }
    }

    /// Reads the endpoint and credential from the environment.
    pub fn from_env(settings: ProviderSettings) -> Result<Self, ProviderError> {
        let url = std::env::var(URL_ENV).map_err(|_| ProviderError::NotConfigured(format!("{URL_ENV} is not set")))?;
        let key = std::env::var(KEY_ENV).ok();
        Ok(Self::new(url, key, settings))
    }

    pub fn request_body(&self, prompt: &PromptSpec) -> Value {
        let mut body = Map::new();
        body.insert("model".into(), json!(self.settings.model));
        body.insert(
            "messages".into(),
            json!([{"role": "user", "content": prompt.rendered_text}]),
        );
        for (k, v) in &self.settings.params {
            body.insert(k.clone(), v.clone());
        }
        Value::Object(body)
    }
}

impl Provider for RemoteProvider {
    fn name(&self) -> &str {
        &self.settings.model
    }

    fn generate(&self, prompt: &PromptSpec) -> Result<String, ProviderError> {
        let mut request = self.agent.post(&self.url);
        if let Some(key) = &self.key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = request.send_json(self.request_body(prompt)).map_err(map_ureq)?;
        let status = response.status();
        let body: Value = response.body_mut().read_json().map_err(map_ureq)?;
        if !status.is_success() {
            return Err(ProviderError::Transport(format!("HTTP {status}: {body}")));
        }
        match body.pointer(&self.settings.response_pointer) {
            Some(Value::String(text)) => Ok(text.clone()),
            Some(other) => Ok(other.to_string()),
            None => Err(ProviderError::BadResponse(format!(
                "no value at {}",
                self.settings.response_pointer
            ))),
        }
    }
}

fn map_ureq(e: ureq::Error) -> ProviderError {
    match e {
        ureq::Error::Timeout(_) => ProviderError::Timeout,
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => ProviderError::Timeout,
        other => ProviderError::Transport(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::prompt::PromptKind;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::mpsc;

    fn prompt() -> PromptSpec {
        PromptSpec {
            kind: PromptKind::Starting,
            rendered_text: "generate 1 solutions".into(),
            embedded_examples: vec![],
            requested_count: 1,
        }
    }

    /// Serves one canned HTTP response and hands back the raw request.
    fn one_shot_server(status: &str, body: &str, delay: Duration) -> (String, mpsc::Receiver<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat", listener.local_addr().unwrap());
        let (tx, rx) = mpsc::channel();
        let response = format!(
            "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        );
        std::thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut head = String::new();
            let mut content_length = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    content_length = v.trim().parse().unwrap();
                }
                head.push_str(&line);
                if line == "\r\n" {
                    break;
                }
            }
            let mut body = vec![0; content_length];
            reader.read_exact(&mut body).unwrap();
            head.push_str(&String::from_utf8(body).unwrap());
            tx.send(head).unwrap();
            std::thread::sleep(delay);
            let mut stream = stream;
            let _ = stream.write_all(response.as_bytes());
        });
        (url, rx)
    }

    #[test]
    fn posts_prompt_as_single_user_message() {
        let (url, rx) = one_shot_server(
            "200 OK",
            r#"{"choices":[{"message":{"content":"[]"}}]}"#,
            Duration::ZERO,
        );
        let mut settings = ProviderSettings {
            model: "chat-small".into(),
            ..ProviderSettings::default()
        };
        settings.params.insert("temperature".into(), json!(0.7));
        let provider = RemoteProvider::new(url, Some("secret".into()), settings);
        assert_eq!(provider.generate(&prompt()).unwrap(), "[]");

        let raw = rx.recv().unwrap();
        assert!(raw.starts_with("POST /v1/chat"));
        assert!(raw.to_ascii_lowercase().contains("authorization: bearer secret"));
        let body: Value = serde_json::from_str(raw.split("\r\n\r\n").nth(1).unwrap()).unwrap();
        assert_eq!(
            body,
            json!({
                "model": "chat-small",
                "messages": [{"role": "user", "content": "generate 1 solutions"}],
                "temperature": 0.7
            })
        );
    }

    #[test]
    fn custom_response_pointer() {
        let (url, _rx) = one_shot_server("200 OK", r#"{"output":{"text":"hi"}}"#, Duration::ZERO);
        let settings = ProviderSettings {
            response_pointer: "/output/text".into(),
            ..ProviderSettings::default()
        };
        assert_eq!(RemoteProvider::new(url, None, settings).generate(&prompt()).unwrap(), "hi");
    }

    #[test]
    fn missing_field_and_http_errors() {
        let (url, _rx) = one_shot_server("200 OK", r#"{"choices":[]}"#, Duration::ZERO);
        let provider = RemoteProvider::new(url, None, ProviderSettings::default());
        assert!(matches!(provider.generate(&prompt()), Err(ProviderError::BadResponse(_))));

        let (url, _rx) = one_shot_server("500 Internal Server Error", r#"{"error":"x"}"#, Duration::ZERO);
        let provider = RemoteProvider::new(url, None, ProviderSettings::default());
        assert!(matches!(provider.generate(&prompt()), Err(ProviderError::Transport(_))));
    }

    #[test]
    fn deadline_maps_to_timeout() {
        let (url, _rx) = one_shot_server("200 OK", "{}", Duration::from_millis(1500));
        let settings = ProviderSettings {
            timeout_secs: 0.2,
            ..ProviderSettings::default()
        };
        let provider = RemoteProvider::new(url, None, settings);
        assert_eq!(provider.generate(&prompt()), Err(ProviderError::Timeout));
    }

    #[test]
    fn settings_validation() {
        assert!(ProviderSettings::default().validate().is_ok());
        let mut bad = ProviderSettings::default();
        bad.params.insert("messages".into(), json!([]));
        assert!(bad.validate().is_err());
        let bad = ProviderSettings {
            batch_limit: 0,
            ..ProviderSettings::default()
        };
        assert!(bad.validate().is_err());
    }
}
