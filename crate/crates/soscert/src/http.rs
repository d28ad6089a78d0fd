//! Remote conjecture source speaking a chat-completions style JSON protocol.
//!
//! Request (POST to `http.url`):
//!
//! ```json
//! {"model": "<http.model>", "temperature": 0.7, "n": <per_call>,
//!  "messages": [{"role": "user", "content": "<prompt>"}]}
//! ```
//!
//! The token from the environment variable `http.token_env` (default
//! `SOSCERT_API_TOKEN`) is sent as `<auth_header>: <auth_scheme> <token>`.
//! Each `choices[i].message.content` (or `choices[i].text`) of the response is
//! one candidate response.

use std::time::Duration;

use serde_json::{json, Value};

use soscert_core::conjecture::{build_prompt, rank, ConjectureCandidate, ConjectureRequest, ConjectureSource, SourceError};
use soscert_core::deadline::Deadline;

use crate::config::HttpSection;

pub struct HttpSource {
    pub cfg: HttpSection,
    pub per_call: usize,
    token: Option<String>,
    agent: ureq::Agent,
}

impl HttpSource {
    /// Reads the token from the configured environment variable.
    pub fn new(cfg: HttpSection, per_call: usize) -> Self {
        let token = std::env::var(&cfg.token_env).ok().filter(|t| !t.is_empty());
        Self::with_token(cfg, per_call, token)
    }

    pub fn with_token(cfg: HttpSection, per_call: usize, token: Option<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(cfg.request_timeout_s.max(0.001))))
            .http_status_as_error(true)
            .build()
            .into();
        HttpSource { cfg, per_call: per_call.max(1), token, agent }
    }

    fn body(&self, prompt: &str, n: usize) -> Value {
        json!({
            "model": self.cfg.model,
            "temperature": self.cfg.temperature,
            "n": n,
            "messages": [{"role": "user", "content": prompt}],
        })
    }

    fn call_once(&self, body: &Value) -> Result<Vec<String>, SourceError> {
        let mut req = self.agent.post(&self.cfg.url).header("Content-Type", "application/json");
        if let Some(t) = &self.token {
            let value = if self.cfg.auth_scheme.is_empty() { t.clone() } else { format!("{} {}", self.cfg.auth_scheme, t) };
            req = req.header(self.cfg.auth_header.as_str(), value.as_str());
        }
        let mut resp = req.send_json(body).map_err(classify)?;
        let v: Value = resp.body_mut().read_json().map_err(|e| SourceError::Other(format!("bad response body: {e}")))?;
        completions(&v)
    }

    /// Retries transport failures up to `retries` times, backing off from 250 ms.
    fn call(&self, body: &Value) -> Result<Vec<String>, SourceError> {
        let mut last = None;
        for attempt in 0..=self.cfg.retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(250 << (attempt - 1).min(4)));
            }
            match self.call_once(body) {
                Ok(v) => return Ok(v),
                Err(e) if e.is_retriable() => {
                    log::warn!("conjecture request failed (attempt {}): {e}", attempt + 1);
                    last = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
        Err(last.unwrap_or(SourceError::Transport("no attempt made".into())))
    }
}

fn classify(e: ureq::Error) -> SourceError {
    match e {
        ureq::Error::StatusCode(code) if code == 429 || code >= 500 => SourceError::Transport(format!("HTTP {code}")),
        ureq::Error::StatusCode(code) => SourceError::Other(format!("HTTP {code}")),
        ureq::Error::Timeout(_) => SourceError::TimedOut,
        other => SourceError::Transport(other.to_string()),
    }
}

/// Candidate texts from a response body.
pub fn completions(v: &Value) -> Result<Vec<String>, SourceError> {
    let choices = v
        .get("choices")
        .and_then(Value::as_array)
        .ok_or_else(|| SourceError::Other("response has no `choices` array".into()))?;
    Ok(choices
        .iter()
        .filter_map(|c| {
            c.pointer("/message/content").or_else(|| c.get("text")).and_then(Value::as_str).map(String::from)
        })
        .collect())
}

impl ConjectureSource for HttpSource {
    fn tag(&self) -> &str {
        "http"
    }

    fn propose(&self, req: &ConjectureRequest, deadline: &dyn Deadline) -> Result<Vec<ConjectureCandidate>, SourceError> {
        if self.cfg.url.is_empty() {
            return Err(SourceError::Other("http.url is not configured".into()));
        }
        let prompt = build_prompt(&req.f);
        let mut sizes = Vec::new();
        let mut left = req.budget_k;
        while left > 0 {
            let n = left.min(self.per_call);
            sizes.push(n);
            left -= n;
        }
        let mut texts = Vec::new();
        let mut errors = Vec::new();
        for wave in sizes.chunks(self.cfg.max_concurrent.max(1)) {
            if deadline.expired() {
                break;
            }
            let results: Vec<Result<Vec<String>, SourceError>> = std::thread::scope(|s| {
                let handles: Vec<_> = wave
                    .iter()
                    .map(|&n| {
                        let body = self.body(&prompt, n);
                        s.spawn(move || self.call(&body))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().unwrap_or_else(|_| Err(SourceError::Other("request thread panicked".into()))))
                    .collect()
            });
            for (n, r) in wave.iter().zip(results) {
                match r {
                    Ok(mut t) => {
                        t.truncate(*n);
                        texts.extend(t);
                    }
                    Err(e) => errors.push(e),
                }
            }
        }
        if texts.is_empty() {
            if let Some(e) = errors.into_iter().next() {
                return Err(e);
            }
        }
        texts.truncate(req.budget_k);
        Ok(rank(texts.iter().map(|t| ConjectureCandidate::from_response(&req.f, t, "http")).collect()))
    }
}
