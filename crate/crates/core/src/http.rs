//! Shared HTTP plumbing for the translation and LLM backends: one JSON POST
//! helper with bounded retries, plus a counting gate that caps concurrent
//! in-flight requests per backend.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use crate::error::{Error, Result};

/// Client settings shared by the HTTP backends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HttpConfig {
    /// Per-request timeout.
    pub timeout: Duration,
    /// Retries after the first attempt.
    pub retries: u32,
    /// Maximum concurrent in-flight requests.
    pub max_in_flight: usize,
}

impl HttpConfig {
    /// Defaults for translation endpoints: 30 s timeout, 2 retries.
    pub fn translation_default() -> Self {
        HttpConfig {
            timeout: Duration::from_secs(30),
            retries: 2,
            max_in_flight: 4,
        }
    }

    /// Defaults for LLM endpoints: 60 s timeout, 2 retries.
    pub fn llm_default() -> Self {
        HttpConfig {
            timeout: Duration::from_secs(60),
            retries: 2,
            max_in_flight: 4,
        }
    }
}

/// Counting gate limiting concurrent in-flight requests.
pub(crate) struct Gate {
    slots: Mutex<usize>,
    freed: Condvar,
}

impl Gate {
    pub(crate) fn new(limit: usize) -> Self {
        Gate {
            slots: Mutex::new(limit.max(1)),
            freed: Condvar::new(),
        }
    }

    pub(crate) fn acquire(&self) -> GateGuard<'_> {
        let mut slots = self.slots.lock().expect("gate lock");
        while *slots == 0 {
            slots = self.freed.wait(slots).expect("gate wait");
        }
        *slots -= 1;
        GateGuard { gate: self }
    }
}

pub(crate) struct GateGuard<'a> {
    gate: &'a Gate,
}

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        let mut slots = self.gate.slots.lock().expect("gate lock");
        *slots += 1;
        self.gate.freed.notify_one();
    }
}

/// Build an agent with the configured per-request timeout. Non-2xx statuses
/// are surfaced as responses so callers can report them.
pub(crate) fn agent(cfg: &HttpConfig) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(cfg.timeout))
        .http_status_as_error(false)
        .build()
        .into()
}

const BACKOFF_BASE: Duration = Duration::from_millis(50);

/// POST a JSON body and parse a JSON response, retrying failed attempts with
/// exponential backoff. A non-200 status, a transport error or a non-JSON
/// body all count as failures.
pub(crate) fn post_json(
    agent: &ureq::Agent,
    url: &str,
    body: &serde_json::Value,
    retries: u32,
) -> Result<serde_json::Value> {
    let mut last_failure = String::new();
    for attempt in 0..=retries {
        if attempt > 0 {
            std::thread::sleep(BACKOFF_BASE * 2u32.pow(attempt - 1));
        }
        match try_post(agent, url, body) {
            Ok(value) => return Ok(value),
            Err(message) => last_failure = message,
        }
    }
    Err(Error::Backend(format!(
        "{url}: {last_failure} (after {} attempts)",
        retries + 1
    )))
}

fn try_post(
    agent: &ureq::Agent,
    url: &str,
    body: &serde_json::Value,
) -> std::result::Result<serde_json::Value, String> {
    let mut resp = agent
        .post(url)
        .send_json(body)
        .map_err(|e| format!("request failed: {e}"))?;
    let status = resp.status();
    if status != 200 {
        return Err(format!("unexpected status {status}"));
    }
    resp.body_mut()
        .read_json::<serde_json::Value>()
        .map_err(|e| format!("invalid JSON response: {e}"))
}
