//! Chat-completions client with caching, retries, and offline backends.
//!
//! Every send is keyed by a content digest of the request; hits are served
//! from the cache as `replay` responses, so a fully warmed cache makes a
//! rerun byte-deterministic with zero network traffic. The live backend
//! talks the OpenAI-compatible wire format; the mock backend serves scripted
//! text; the replay backend refuses to touch the network at all.

mod cache;
mod limiter;
mod mock;

pub use cache::{CacheEntry, RequestMeta, ResponseCache};
pub use limiter::TokenBucket;
pub use mock::{MockScript, MockScriptError};

use crate::digest::{sha256_hex, sha256_hex_fields};
use crate::domain::ModelConfig;
use crate::prompting::RequestPayload;
use rand::Rng;
use serde::Deserialize;
use serde_json::json;
use std::sync::Arc;
use std::time::Duration;
use thiserror::Error;
use tokio::sync::Semaphore;

/// Where a response came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseSource {
    Live,
    Replay,
    Mock,
}

impl ResponseSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            ResponseSource::Live => "live",
            ResponseSource::Replay => "replay",
            ResponseSource::Mock => "mock",
        }
    }
}

/// Assistant text plus provenance.
#[derive(Debug, Clone)]
pub struct RawResponse {
    pub text: String,
    pub latency: Duration,
    pub backend: ResponseSource,
    pub digest: String,
}

impl RawResponse {
    fn new(text: String, latency: Duration, backend: ResponseSource) -> Self {
        let digest = sha256_hex(text.as_bytes());
        RawResponse {
            text,
            latency,
            backend,
            digest,
        }
    }
}

/// Digest identifying one request; repetition is part of the key so repeated
/// prompts are genuinely re-sent instead of replaying repetition 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey(String);

impl CacheKey {
    pub fn as_hex(&self) -> &str {
        &self.0
    }
}

/// Deterministic key over everything that shapes the response.
pub fn cache_key(payload: &RequestPayload) -> CacheKey {
    let temperature = format!("{}", payload.model.temperature);
    let repetition = payload.repetition.to_string();
    let image_digest = payload.image.encoded_digest();
    CacheKey(sha256_hex_fields([
        payload.model.model_name.as_bytes(),
        temperature.as_bytes(),
        payload.prompt_digest.as_bytes(),
        payload.item_text.as_bytes(),
        image_digest.as_bytes(),
        repetition.as_bytes(),
    ]))
}

#[derive(Debug, Error)]
pub enum SendError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("replay backend has no cached response for key {0}")]
    ReplayMiss(String),
    #[error("mock script has no rule matching item {0:?}")]
    NoScriptMatch(String),
}

impl SendError {
    /// Fatal errors abort the whole run; the rest degrade to a rejected record.
    pub fn is_fatal(&self) -> bool {
        matches!(self, SendError::Auth(_))
    }
}

#[derive(Debug, Error)]
pub enum ClientBuildError {
    #[error("api key environment variable {0} is not set")]
    MissingApiKey(String),
    #[error("invalid model config: {0}")]
    Config(#[from] crate::domain::ConfigError),
    #[error("http client: {0}")]
    Http(#[from] reqwest::Error),
}

enum Backend {
    Live {
        http: reqwest::Client,
        api_key: String,
        limiter: Option<TokenBucket>,
    },
    Mock(MockScript),
    Replay,
}

/// Retry schedule for transient failures: exponential backoff with jitter.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 4,
            base_delay: Duration::from_millis(250),
            max_delay: Duration::from_secs(8),
        }
    }
}

impl RetryPolicy {
    fn delay(&self, attempt: u32) -> Duration {
        let exp = self
            .base_delay
            .saturating_mul(2u32.saturating_pow(attempt))
            .min(self.max_delay);
        let jitter = rand::rng().random_range(0.5..1.5);
        exp.mul_f64(jitter)
    }
}

pub struct LlmClient {
    backend: Backend,
    cache: ResponseCache,
    semaphore: Arc<Semaphore>,
    retry: RetryPolicy,
}

impl LlmClient {
    /// Live client; reads the API key from the configured environment
    /// variable and fails fast when it is missing.
    pub fn live(
        config: &ModelConfig,
        cache_dir: impl Into<std::path::PathBuf>,
    ) -> Result<Self, ClientBuildError> {
        config.validate()?;
        let api_key = std::env::var(&config.api_key_env)
            .map_err(|_| ClientBuildError::MissingApiKey(config.api_key_env.clone()))?;
        let http = reqwest::Client::builder()
            .timeout(Duration::from_secs(config.request_timeout_secs))
            .build()?;
        let limiter = config.requests_per_minute.map(TokenBucket::per_minute);
        Ok(LlmClient {
            backend: Backend::Live {
                http,
                api_key,
                limiter,
            },
            cache: ResponseCache::new(cache_dir),
            semaphore: Arc::new(Semaphore::new(config.concurrency_limit)),
            retry: RetryPolicy {
                max_retries: config.max_retries,
                ..RetryPolicy::default()
            },
        })
    }

    pub fn mock(
        config: &ModelConfig,
        script: MockScript,
        cache_dir: impl Into<std::path::PathBuf>,
    ) -> Result<Self, ClientBuildError> {
        config.validate()?;
        Ok(LlmClient {
            backend: Backend::Mock(script),
            cache: ResponseCache::new(cache_dir),
            semaphore: Arc::new(Semaphore::new(config.concurrency_limit)),
            retry: RetryPolicy::default(),
        })
    }

    pub fn replay(
        config: &ModelConfig,
        cache_dir: impl Into<std::path::PathBuf>,
    ) -> Result<Self, ClientBuildError> {
        config.validate()?;
        Ok(LlmClient {
            backend: Backend::Replay,
            cache: ResponseCache::new(cache_dir),
            semaphore: Arc::new(Semaphore::new(config.concurrency_limit)),
            retry: RetryPolicy::default(),
        })
    }

    /// Sends a payload, serving from cache when possible. Live successes and
    /// mock responses are persisted so later runs replay them.
    pub async fn send(&self, payload: &RequestPayload) -> Result<RawResponse, SendError> {
        let key = cache_key(payload);
        if let Some(entry) = self.cache.get(key.as_hex()) {
            return Ok(RawResponse::new(
                entry.response_text,
                Duration::ZERO,
                ResponseSource::Replay,
            ));
        }
        match &self.backend {
            Backend::Replay => Err(SendError::ReplayMiss(key.as_hex().to_string())),
            Backend::Mock(script) => {
                let Some(text) = script.lookup(payload) else {
                    return Err(SendError::NoScriptMatch(payload.item_id.clone()));
                };
                self.persist(&key, payload, &text, ResponseSource::Mock);
                Ok(RawResponse::new(text, Duration::ZERO, ResponseSource::Mock))
            }
            Backend::Live {
                http,
                api_key,
                limiter,
            } => {
                let _permit = self
                    .semaphore
                    .acquire()
                    .await
                    .expect("semaphore never closed");
                let started = tokio::time::Instant::now();
                let mut attempt = 0u32;
                loop {
                    if let Some(limiter) = limiter {
                        limiter.acquire().await;
                    }
                    match self.attempt_live(http, api_key, payload).await {
                        Ok(text) => {
                            if attempt > 0 {
                                tracing::info!(
                                    item = %payload.item_id,
                                    retries = attempt,
                                    "request succeeded after retries"
                                );
                            }
                            self.persist(&key, payload, &text, ResponseSource::Live);
                            return Ok(RawResponse::new(
                                text,
                                started.elapsed(),
                                ResponseSource::Live,
                            ));
                        }
                        Err(AttemptError::Fatal(message)) => {
                            return Err(SendError::Auth(message));
                        }
                        Err(AttemptError::Permanent(message)) => {
                            return Err(SendError::Transport {
                                attempts: attempt + 1,
                                message,
                            });
                        }
                        Err(AttemptError::Transient(message)) => {
                            if attempt >= self.retry.max_retries {
                                return Err(SendError::Transport {
                                    attempts: attempt + 1,
                                    message,
                                });
                            }
                            let delay = self.retry.delay(attempt);
                            tracing::warn!(
                                item = %payload.item_id,
                                attempt = attempt + 1,
                                delay_ms = delay.as_millis() as u64,
                                error = %message,
                                "transient failure, backing off"
                            );
                            tokio::time::sleep(delay).await;
                            attempt += 1;
                        }
                    }
                }
            }
        }
    }

    fn persist(
        &self,
        key: &CacheKey,
        payload: &RequestPayload,
        text: &str,
        source: ResponseSource,
    ) {
        let entry = CacheEntry {
            request_meta: RequestMeta {
                item_id: payload.item_id.clone(),
                repetition: payload.repetition,
                model_name: payload.model.model_name.clone(),
                temperature: payload.model.temperature,
                prompt_digest: payload.prompt_digest.clone(),
                image_digest: payload.image.encoded_digest(),
            },
            response_text: text.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            backend: source.as_str().to_string(),
        };
        if let Err(e) = self.cache.put(key.as_hex(), &entry) {
            tracing::warn!(key = key.as_hex(), error = %e, "failed to persist cache entry");
        }
    }

    async fn attempt_live(
        &self,
        http: &reqwest::Client,
        api_key: &str,
        payload: &RequestPayload,
    ) -> Result<String, AttemptError> {
        let url = format!(
            "{}/chat/completions",
            payload.model.endpoint_url.trim_end_matches('/')
        );
        let mut body = json!({
            "model": payload.model.model_name,
            "temperature": payload.model.temperature,
            "max_tokens": payload.model.max_output_tokens,
            "messages": [{
                "role": "user",
                "content": [
                    {"type": "text", "text": payload.message_text},
                    {"type": "image_url", "image_url": {"url": payload.image.data_url()}}
                ]
            }],
        });
        if let Some(seed) = payload.model.seed {
            body["seed"] = json!(seed);
        }
        let response = http
            .post(&url)
            .bearer_auth(api_key)
            .json(&body)
            .send()
            .await
            .map_err(|e| AttemptError::Transient(format!("request error: {e}")))?;
        let status = response.status();
        if status == reqwest::StatusCode::UNAUTHORIZED || status == reqwest::StatusCode::FORBIDDEN {
            let text = response.text().await.unwrap_or_default();
            return Err(AttemptError::Fatal(format!("{status}: {text}")));
        }
        if status.as_u16() == 429 || status.is_server_error() {
            let text = response.text().await.unwrap_or_default();
            return Err(AttemptError::Transient(format!("{status}: {text}")));
        }
        if !status.is_success() {
            let text = response.text().await.unwrap_or_default();
            return Err(AttemptError::Permanent(format!("{status}: {text}")));
        }
        let parsed: ChatResponse = response
            .json()
            .await
            .map_err(|e| AttemptError::Permanent(format!("malformed response body: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| AttemptError::Permanent("response has no message content".to_string()))
    }
}

enum AttemptError {
    /// Retry with backoff.
    Transient(String),
    /// Do not retry; not an auth problem.
    Permanent(String),
    /// Abort the run.
    Fatal(String),
}

#[derive(Deserialize)]
struct ChatResponse {
    #[serde(default)]
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}
