//! HTTP client for language models served behind the
//! `POST <endpoint>/next_token_distribution` protocol.
//!
//! Request: `{"tokens": ["a", "b"]}` (the empty word is `[]`).
//! Response: `{"probs": {"a": 0.2, "b": 0.3, "$": 0.5}}` with status 200.

use std::collections::BTreeMap;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::distribution::{Distribution, SUM_TOLERANCE};
use crate::error::{Error, Result};

use super::LanguageModel;

/// Overrides [`RemoteConfig::timeout`] when set (milliseconds).
pub const TIMEOUT_ENV: &str = "PDFA_FORGE_LM_TIMEOUT_MS";

/// Sums within this distance of 1 are accepted and renormalized.
const WIRE_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct RemoteConfig {
    pub timeout: Duration,
    /// Attempts after the first one for transport errors and 5xx responses.
    pub retries: u32,
    pub max_in_flight: usize,
    /// Rescale responses whose sum is off by more than the wire tolerance.
    pub renormalize: bool,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            timeout: Duration::from_secs(30),
            retries: 3,
            max_in_flight: 4,
            renormalize: false,
        }
    }
}

impl RemoteConfig {
    /// Applies the [`TIMEOUT_ENV`] override.
    pub fn with_env(mut self) -> Result<Self> {
        if let Ok(text) = std::env::var(TIMEOUT_ENV) {
            let ms: u64 = text
                .trim()
                .parse()
                .map_err(|_| Error::Remote(format!("bad {TIMEOUT_ENV} value `{text}`")))?;
            self.timeout = Duration::from_millis(ms);
        }
        Ok(self)
    }
}

#[derive(Serialize)]
struct QueryRequest<'a> {
    tokens: Vec<&'a str>,
}

#[derive(Deserialize)]
struct QueryResponse {
    probs: BTreeMap<String, f64>,
}

struct InFlight {
    count: Mutex<usize>,
    freed: Condvar,
    limit: usize,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn acquire(&self) -> Permit<'_> {
        let mut count = self.count.lock().expect("limiter poisoned");
        while *count >= self.limit {
            count = self.freed.wait(count).expect("limiter poisoned");
        }
        *count += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.count.lock().expect("limiter poisoned") -= 1;
        self.0.freed.notify_one();
    }
}

enum Attempt {
    Transient(String),
    Fatal(Error),
}

pub struct RemoteModel {
    url: String,
    alphabet: Arc<Alphabet>,
    agent: ureq::Agent,
    config: RemoteConfig,
    in_flight: InFlight,
}

impl RemoteModel {
    pub fn new(endpoint: &str, alphabet: Arc<Alphabet>, config: RemoteConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        RemoteModel {
            url: format!("{}/next_token_distribution", endpoint.trim_end_matches('/')),
            alphabet,
            agent,
            in_flight: InFlight {
                count: Mutex::new(0),
                freed: Condvar::new(),
                limit: config.max_in_flight.max(1),
            },
            config,
        }
    }

    fn attempt(&self, body: &QueryRequest<'_>) -> std::result::Result<QueryResponse, Attempt> {
        let _permit = self.in_flight.acquire();
        let mut response = self
            .agent
            .post(&self.url)
            .send_json(body)
            .map_err(|e| Attempt::Transient(e.to_string()))?;
        let status = response.status().as_u16();
        if status >= 500 {
            return Err(Attempt::Transient(format!("status {status}")));
        }
        if status != 200 {
            return Err(Attempt::Fatal(Error::Remote(format!("status {status}"))));
        }
        response
            .body_mut()
            .read_json::<QueryResponse>()
            .map_err(|e| Attempt::Fatal(Error::Remote(format!("malformed response: {e}"))))
    }

    fn decode(&self, probs: BTreeMap<String, f64>) -> Result<Distribution> {
        let mut values = vec![f64::NAN; self.alphabet.extended_len()];
        for (name, p) in probs {
            let i = self
                .alphabet
                .extended_index(&name)
                .ok_or_else(|| Error::Remote(format!("unexpected symbol `{name}` in response")))?;
            values[i] = p;
        }
        if let Some(i) = values.iter().position(|p| p.is_nan()) {
            return Err(Error::Remote(format!(
                "response lacks `{}`",
                self.alphabet.name(i)
            )));
        }
        if values.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Remote("response has a negative or non-finite probability".into()));
        }
        let sum: f64 = values.iter().sum();
        let off = (sum - 1.0).abs();
        if off > WIRE_SUM_TOLERANCE && !self.config.renormalize {
            return Err(Error::Remote(format!("probabilities sum to {sum}")));
        }
        if sum <= 0.0 {
            return Err(Error::Remote("probabilities sum to zero".into()));
        }
        if off > SUM_TOLERANCE {
            if off > WIRE_SUM_TOLERANCE {
                warn!("renormalizing response summing to {sum}");
            }
            for p in &mut values {
                *p /= sum;
            }
        }
        Distribution::new(&self.alphabet, values)
    }
}

impl LanguageModel for RemoteModel {
    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn query(&self, word: &[usize]) -> Result<Distribution> {
        self.alphabet.check_word(word)?;
        let body = QueryRequest {
            tokens: word.iter().map(|&s| self.alphabet.name(s)).collect(),
        };
        let mut last = String::new();
        for attempt in 0..=self.config.retries {
            match self.attempt(&body) {
                Ok(response) => return self.decode(response.probs),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Transient(reason)) => {
                    debug!("attempt {} against {} failed: {reason}", attempt + 1, self.url);
                    last = reason;
                }
            }
        }
        Err(Error::Remote(format!(
            "giving up after {} attempts: {last}",
            self.config.retries + 1
        )))
    }
}

/// Builds a client for `endpoint` with the default configuration plus the
/// environment timeout override.
pub fn remote_model(endpoint: &str, alphabet: Arc<Alphabet>, timeout: Duration) -> Result<RemoteModel> {
    let config = RemoteConfig {
        timeout,
        ..RemoteConfig::default()
    }
    .with_env()?;
    Ok(RemoteModel::new(endpoint, alphabet, config))
}
