//! Dynamically constructed key-value stores.
//!
//! Two stores grow as the run progresses: one fed by the parameters of
//! successful requests (a created resource is described by the inputs that
//! created it, even when the response is a bare "Successfully created"), and
//! one fed by sampled leaves of JSON response bodies. Lookups never mutate;
//! eviction only happens when an explicit capacity is set.

use std::collections::VecDeque;

use rand::Rng;
use serde_json::Value;

use crate::agent::StatusClass;

/// One harvested pair. `seq` is a logical insertion timestamp, unique and
/// increasing across both stores.
#[derive(Debug, Clone)]
pub struct StoredPair {
    pub key: String,
    pub value: Value,
    pub seq: u64,
}

/// The request-side and response-side key-value stores.
#[derive(Debug, Default)]
pub struct KeyValueMemory {
    request_pairs: VecDeque<StoredPair>,
    response_pairs: VecDeque<StoredPair>,
    capacity: Option<usize>,
    next_seq: u64,
}

impl KeyValueMemory {
    /// An unbounded memory.
    pub fn new() -> Self {
        KeyValueMemory::default()
    }

    /// A memory that keeps at most `capacity` entries per store, evicting
    /// the oldest.
    pub fn with_capacity(capacity: usize) -> Self {
        KeyValueMemory { capacity: Some(capacity), ..KeyValueMemory::default() }
    }

    /// Request-side pairs in insertion order.
    pub fn request_pairs(&self) -> impl Iterator<Item = &StoredPair> {
        self.request_pairs.iter()
    }

    /// Response-side pairs in insertion order.
    pub fn response_pairs(&self) -> impl Iterator<Item = &StoredPair> {
        self.response_pairs.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.request_pairs.is_empty() && self.response_pairs.is_empty()
    }

    /// Record the sent parameters of a successful request. Anything but a
    /// 2xx records nothing — failed inputs describe no resource.
    pub fn record_from_request(&mut self, sent: &[(String, Value)], status: StatusClass) {
        if status != StatusClass::Success2xx {
            return;
        }
        for (name, value) in sent {
            self.push(Side::Request, name.clone(), value.clone());
        }
    }

    /// Record leaves of a JSON response body, keeping a uniform random
    /// sample of at most `sample_size` pairs (`None` keeps every pair).
    ///
    /// Returns the number of pairs stored, or `None` when the body is not
    /// JSON at all — such bodies are skipped, and it is the caller's job to
    /// count them.
    pub fn record_from_response<R: Rng>(
        &mut self,
        body: &[u8],
        sample_size: Option<usize>,
        rng: &mut R,
    ) -> Option<usize> {
        let parsed: Value = serde_json::from_slice(body).ok()?;
        let mut pairs = flatten(&parsed);
        if let Some(limit) = sample_size {
            if pairs.len() > limit {
                pairs = sample_pairs(pairs, limit, rng);
            }
        }
        let stored = pairs.len();
        for (key, value) in pairs {
            self.push(Side::Response, key, value);
        }
        Some(stored)
    }

    fn push(&mut self, side: Side, key: String, value: Value) {
        let store = match side {
            Side::Request => &mut self.request_pairs,
            Side::Response => &mut self.response_pairs,
        };
        if let Some(cap) = self.capacity {
            if cap == 0 {
                return;
            }
            while store.len() >= cap {
                store.pop_front();
            }
        }
        store.push_back(StoredPair { key, value, seq: self.next_seq });
        self.next_seq += 1;
    }
}

enum Side {
    Request,
    Response,
}

/// Flatten a JSON value into (key, scalar) leaves.
///
/// The key of a leaf is the nearest enclosing object-member name; array
/// indices contribute nothing, so `{"a": [1, 2]}` yields `(a, 1), (a, 2)`
/// and a top-level scalar or array of scalars yields nothing at all.
pub fn flatten(value: &Value) -> Vec<(String, Value)> {
    let mut out = Vec::new();
    walk(value, None, &mut out);
    out
}

fn walk(value: &Value, key: Option<&str>, out: &mut Vec<(String, Value)>) {
    match value {
        Value::Object(map) => {
            for (name, sub) in map {
                walk(sub, Some(name), out);
            }
        }
        Value::Array(items) => {
            for item in items {
                walk(item, key, out);
            }
        }
        scalar => {
            if let Some(name) = key {
                out.push((name.to_string(), scalar.clone()));
            }
        }
    }
}

/// Uniform sample of exactly `n` pairs, partial Fisher-Yates, consuming `n`
/// draws.
fn sample_pairs<R: Rng>(
    mut pairs: Vec<(String, Value)>,
    n: usize,
    rng: &mut R,
) -> Vec<(String, Value)> {
    let len = pairs.len();
    for i in 0..n {
        let j = rng.gen_range(i..len);
        pairs.swap(i, j);
    }
    pairs.truncate(n);
    pairs
}
