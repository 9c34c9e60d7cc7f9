use std::collections::HashMap;
use std::path::Path;
use std::thread;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::prompt::{Prompt, Strategy};
use crate::io::read_jsonl;
use crate::{Error, Result};

/// Environment variable holding the bearer token sent to the endpoint.
pub const ENDPOINT_TOKEN_ENV: &str = "STYLOVERIFY_ENDPOINT_TOKEN";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub source_doc_id: String,
    pub strategy: Strategy,
    pub model_tag: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointConfig {
    pub url: String,
    pub model_tag: String,
    /// Extra attempts after the first failure.
    pub retries: u32,
    pub timeout_secs: u64,
    pub max_in_flight: usize,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            url: String::new(),
            model_tag: "endpoint".to_string(),
            retries: 2,
            timeout_secs: 120,
            max_in_flight: 4,
        }
    }
}

impl EndpointConfig {
    pub fn validate(&self) -> Result<()> {
        if self.url.is_empty() {
            return Err(Error::InvalidConfig("endpoint url is empty".into()));
        }
        if self.model_tag.is_empty() {
            return Err(Error::InvalidConfig("endpoint model_tag is empty".into()));
        }
        if self.timeout_secs == 0 || self.max_in_flight == 0 {
            return Err(Error::InvalidConfig("endpoint timeout_secs and max_in_flight must be positive".into()));
        }
        Ok(())
    }
}

/// Anything that turns a prompt into generated texts. Offline sources may hold
/// several model outputs for one prompt, so a call returns a list.
pub trait Generator: Sync {
    fn generate(&self, prompt: &Prompt) -> Result<Vec<GenerationRecord>>;
}

#[derive(Serialize)]
struct WireRequest<'a> {
    system: &'a str,
    prompt: &'a str,
    max_words: usize,
}

#[derive(Deserialize)]
struct WireResponse {
    text: String,
}

/// JSON-over-HTTP generation endpoint.
pub struct HttpEndpoint {
    config: EndpointConfig,
    agent: ureq::Agent,
    token: Option<String>,
}

impl HttpEndpoint {
    /// Reads the bearer token from [`ENDPOINT_TOKEN_ENV`] if set.
    pub fn new(config: EndpointConfig) -> Result<Self> {
        let token = std::env::var(ENDPOINT_TOKEN_ENV).ok().filter(|t| !t.is_empty());
        Self::with_token(config, token)
    }

    pub fn with_token(config: EndpointConfig, token: Option<String>) -> Result<Self> {
        config.validate()?;
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpEndpoint { config, agent, token })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    fn attempt(&self, prompt: &Prompt) -> Result<String> {
        let body = WireRequest {
            system: &prompt.system_preamble,
            prompt: &prompt.user_prompt,
            max_words: prompt.target_words.max,
        };
        let mut request = self.agent.post(&self.config.url);
        if let Some(token) = &self.token {
            request = request.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = request
            .send_json(&body)
            .map_err(|e| Error::EndpointFailure(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(Error::EndpointFailure(format!("HTTP {}", status.as_u16())));
        }
        let parsed: WireResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| Error::EndpointFailure(format!("bad response body: {e}")))?;
        let text = parsed.text.trim();
        if text.is_empty() {
            return Err(Error::EndpointFailure("empty text".into()));
        }
        Ok(text.to_string())
    }
}

impl Generator for HttpEndpoint {
    fn generate(&self, prompt: &Prompt) -> Result<Vec<GenerationRecord>> {
        let mut attempt = 0;
        loop {
            match self.attempt(prompt) {
                Ok(text) => {
                    return Ok(vec![GenerationRecord {
                        source_doc_id: prompt.source_doc_id.clone(),
                        strategy: prompt.strategy,
                        model_tag: self.config.model_tag.clone(),
                        text,
                    }])
                }
                Err(e) if attempt >= self.config.retries => return Err(e),
                Err(_) => {
                    attempt += 1;
                    thread::sleep(Duration::from_millis(250 << attempt.min(6)));
                }
            }
        }
    }
}

/// Pre-generated texts joined to prompts by `(source_doc_id, strategy)`.
#[derive(Debug, Clone, Default)]
pub struct OfflineCompletions {
    by_key: HashMap<(String, Strategy), Vec<GenerationRecord>>,
}

impl OfflineCompletions {
    pub fn from_records(records: impl IntoIterator<Item = GenerationRecord>) -> Result<Self> {
        let mut by_key: HashMap<_, Vec<GenerationRecord>> = HashMap::new();
        for r in records {
            if r.text.trim().is_empty() {
                return Err(Error::malformed(
                    format!("completion ({}, {})", r.source_doc_id, r.strategy),
                    "empty text",
                ));
            }
            let slot = by_key.entry((r.source_doc_id.clone(), r.strategy)).or_default();
            if slot.iter().any(|o| o.model_tag == r.model_tag) {
                return Err(Error::DuplicateId(format!("{}/{}/{}", r.source_doc_id, r.strategy, r.model_tag)));
            }
            slot.push(r);
        }
        for slot in by_key.values_mut() {
            slot.sort_by(|a, b| a.model_tag.cmp(&b.model_tag));
        }
        Ok(OfflineCompletions { by_key })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_records(read_jsonl::<GenerationRecord>(path)?)
    }

    pub fn len(&self) -> usize {
        self.by_key.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }
}

impl Generator for OfflineCompletions {
    fn generate(&self, prompt: &Prompt) -> Result<Vec<GenerationRecord>> {
        self.by_key
            .get(&(prompt.source_doc_id.clone(), prompt.strategy))
            .cloned()
            .ok_or_else(|| Error::MissingOfflineRecord {
                doc_id: prompt.source_doc_id.clone(),
                strategy: prompt.strategy.as_str().to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureEntry {
    pub source_doc_id: String,
    pub strategy: Strategy,
    pub kind: String,
    pub message: String,
}

/// Every prompt ends up either in `records` or in `failures`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchOutcome {
    pub records: Vec<GenerationRecord>,
    pub failures: Vec<FailureEntry>,
}

/// Runs `prompts` through `generator` with at most `max_in_flight` concurrent
/// calls. Output order follows `prompts`.
pub fn run_batch<G: Generator + ?Sized>(prompts: &[Prompt], generator: &G, max_in_flight: usize) -> Result<BatchOutcome> {
    if max_in_flight == 0 {
        return Err(Error::InvalidConfig("max_in_flight must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(max_in_flight)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<Vec<GenerationRecord>>> =
        pool.install(|| prompts.par_iter().map(|s| generator.generate(s)).collect());
    let mut outcome = BatchOutcome::default();
    for (prompt, result) in prompts.iter().zip(results) {
        match result {
            Ok(records) => outcome.records.extend(records),
            Err(e) => outcome.failures.push(FailureEntry {
                source_doc_id: prompt.source_doc_id.clone(),
                strategy: prompt.strategy,
                kind: e.kind().to_string(),
                message: e.to_string(),
            }),
        }
    }
    Ok(outcome)
}
