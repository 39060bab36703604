//! The exchange store: recorded request/response pairs, keyed for replay.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Read, Write};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::SandboxError;

/// Bump when the persisted NDJSON layout changes.
pub const STORE_VERSION: u32 = 1;

/// One captured request/response pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordedExchange {
    pub callee: String,
    /// Digest of `(callee, canonicalized payload)`; see [`request_key`].
    pub request_key: String,
    pub response: Vec<u8>,
    /// Virtual time the response was observed. Later recordings replace
    /// earlier ones under the same key.
    pub recorded_at_ms: f64,
}

/// Digest identifying a request. JSON payloads are key-sorted before
/// hashing so field order does not split recordings; opaque bytes are
/// hashed as-is.
pub fn request_key(callee: &str, payload: &[u8]) -> String {
    use std::fmt::Write as _;
    let canonical = canonicalize(payload);
    let mut hasher = Sha256::new();
    hasher.update(callee.as_bytes());
    hasher.update([0u8]);
    hasher.update(&canonical);
    hasher.finalize().iter().fold(String::with_capacity(64), |mut hex, byte| {
        write!(hex, "{byte:02x}").expect("writing to a string cannot fail");
        hex
    })
}

fn canonicalize(payload: &[u8]) -> Vec<u8> {
    match serde_json::from_slice::<serde_json::Value>(payload) {
        // serde_json maps are ordered, so serializing sorts object keys.
        Ok(value) => value.to_string().into_bytes(),
        Err(_) => payload.to_vec(),
    }
}

/// Recording-side store. Cheap to clone; clones share contents, so the
/// platform's exchange tap can append while the caller keeps a handle.
#[derive(Debug, Clone, Default)]
pub struct ExchangeStore {
    inner: Arc<Mutex<HashMap<String, RecordedExchange>>>,
}

impl ExchangeStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, callee: &str, payload: &[u8], response: &[u8], at_ms: f64) {
        let key = request_key(callee, payload);
        let exchange = RecordedExchange {
            callee: callee.to_string(),
            request_key: key.clone(),
            response: response.to_vec(),
            recorded_at_ms: at_ms,
        };
        self.inner.lock().unwrap().insert(key, exchange);
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Callees with at least one recording.
    pub fn callees(&self) -> BTreeSet<String> {
        self.inner.lock().unwrap().values().map(|e| e.callee.clone()).collect()
    }

    pub fn get(&self, callee: &str, payload: &[u8]) -> Option<RecordedExchange> {
        self.inner.lock().unwrap().get(&request_key(callee, payload)).cloned()
    }

    /// Immutable replay snapshot. Mocks read it lock-free.
    pub fn freeze(&self) -> FrozenStore {
        let guard = self.inner.lock().unwrap();
        let by_key: HashMap<String, Vec<u8>> =
            guard.iter().map(|(k, e)| (k.clone(), e.response.clone())).collect();
        let mut latest: HashMap<String, (f64, &String, &RecordedExchange)> = HashMap::new();
        for (key, exchange) in guard.iter() {
            let candidate = (exchange.recorded_at_ms, key, exchange);
            match latest.get(&exchange.callee) {
                // Tie-break equal timestamps by key so replay does not
                // depend on hash-map iteration order.
                Some(&(ts, k, _)) if (candidate.0, candidate.1) <= (ts, k) => {}
                _ => {
                    latest.insert(exchange.callee.clone(), candidate);
                }
            }
        }
        let latest_by_callee =
            latest.into_iter().map(|(c, (_, _, e))| (c, e.response.clone())).collect();
        FrozenStore {
            by_key,
            latest_by_callee,
            exact_hits: AtomicU64::new(0),
            fallback_hits: AtomicU64::new(0),
        }
    }

    /// Persist as versioned NDJSON: a version line, then one line per
    /// exchange, sorted for reproducible output.
    pub fn save<W: Write>(&self, mut writer: W) -> Result<(), SandboxError> {
        let guard = self.inner.lock().unwrap();
        let mut lines: Vec<Line> = guard
            .values()
            .map(|e| Line {
                callee: e.callee.clone(),
                key: e.request_key.clone(),
                response_b64: BASE64.encode(&e.response),
                ts: e.recorded_at_ms,
            })
            .collect();
        lines.sort_by(|a, b| (&a.callee, &a.key).cmp(&(&b.callee, &b.key)));
        writeln!(writer, "{}", serde_json::to_string(&VersionLine { version: STORE_VERSION })?)?;
        for line in lines {
            writeln!(writer, "{}", serde_json::to_string(&line)?)?;
        }
        Ok(())
    }

    pub fn load<R: Read>(reader: R) -> Result<Self, SandboxError> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines
            .next()
            .ok_or_else(|| SandboxError::MalformedStore {
                line: 1,
                reason: "empty file, expected a version line".into(),
            })??;
        let version: VersionLine = serde_json::from_str(&header)
            .map_err(|e| SandboxError::MalformedStore { line: 1, reason: e.to_string() })?;
        if version.version != STORE_VERSION {
            return Err(SandboxError::UnsupportedVersion(version.version));
        }
        let store = ExchangeStore::new();
        {
            let mut guard = store.inner.lock().unwrap();
            for (idx, line) in lines.enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let parsed: Line = serde_json::from_str(&line)
                    .map_err(|e| SandboxError::MalformedStore { line: idx + 2, reason: e.to_string() })?;
                let response = BASE64.decode(&parsed.response_b64).map_err(|e| {
                    SandboxError::MalformedStore { line: idx + 2, reason: e.to_string() }
                })?;
                guard.insert(
                    parsed.key.clone(),
                    RecordedExchange {
                        callee: parsed.callee,
                        request_key: parsed.key,
                        response,
                        recorded_at_ms: parsed.ts,
                    },
                );
            }
        }
        Ok(store)
    }
}

#[derive(Serialize, Deserialize)]
struct VersionLine {
    version: u32,
}

#[derive(Serialize, Deserialize)]
struct Line {
    callee: String,
    key: String,
    response_b64: String,
    ts: f64,
}

/// Read-only snapshot mocks answer from. Hit counters use atomics so
/// concurrent replays never contend on a lock.
#[derive(Debug)]
pub struct FrozenStore {
    by_key: HashMap<String, Vec<u8>>,
    latest_by_callee: HashMap<String, Vec<u8>>,
    exact_hits: AtomicU64,
    fallback_hits: AtomicU64,
}

/// How faithful a replay was: fallbacks mean the mock answered payloads it
/// never saw recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReplayStats {
    pub exact_hits: u64,
    pub fallback_hits: u64,
}

impl FrozenStore {
    pub fn has_callee(&self, callee: &str) -> bool {
        self.latest_by_callee.contains_key(callee)
    }

    /// Replay lookup: exact key hit returns the recording verbatim; an
    /// unseen payload falls back to the callee's most recent recording.
    pub fn lookup(&self, callee: &str, payload: &[u8]) -> Result<Vec<u8>, SandboxError> {
        if let Some(response) = self.by_key.get(&request_key(callee, payload)) {
            self.exact_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(response.clone());
        }
        if let Some(response) = self.latest_by_callee.get(callee) {
            self.fallback_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(response.clone());
        }
        Err(SandboxError::NoRecordingForCallee(callee.to_string()))
    }

    pub fn stats(&self) -> ReplayStats {
        ReplayStats {
            exact_hits: self.exact_hits.load(Ordering::Relaxed),
            fallback_hits: self.fallback_hits.load(Ordering::Relaxed),
        }
    }
}

/// Convenience form of [`FrozenStore::lookup`] matching the pipeline's
/// "look up what the mock would say" step.
pub fn mock_lookup(store: &FrozenStore, callee: &str, payload: &[u8]) -> Result<Vec<u8>, SandboxError> {
    store.lookup(callee, payload)
}
