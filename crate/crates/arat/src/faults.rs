//! Deduplication of 500 responses into unique faults.
//!
//! A fault's identity is a digest of canonical text. When the body carries a
//! recognizable stack trace (JVM-, Python-, or Go-style frame lines, or an
//! exception header), the canonical text is exactly those trace lines —
//! surrounding log noise, timestamps included, falls away. Otherwise the
//! whole body is kept but volatile tokens (ISO-8601 timestamps, epoch
//! integers, UUIDs, long hex runs) are replaced by fixed placeholders, so
//! two occurrences of the same failure hash identically.

use std::sync::OnceLock;

use indexmap::IndexMap;
use regex::Regex;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::agent::StatusClass;
use crate::executor::{RequestPlan, ResponseRecord};

const EXEMPLAR_CAP: usize = 480;

/// How the canonical text was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FingerprintKind {
    StackTrace,
    NormalizedText,
}

/// Canonical identity of one 500 response.
#[derive(Debug, Clone, Serialize)]
pub struct FaultFingerprint {
    pub kind: FingerprintKind,
    /// Hex SHA-256 of the canonical text.
    pub digest: String,
    /// Sequence number of the request that first produced it.
    pub first_seen: u64,
    /// Canonical text, truncated.
    pub exemplar: String,
}

/// Fingerprint a server-error response observed as request number `seq`.
pub fn fingerprint(response: &ResponseRecord, seq: u64) -> FaultFingerprint {
    debug_assert_eq!(response.status_class, StatusClass::ServerError500);
    let body = response.body_text();
    let (kind, canonical) = if body.trim().is_empty() {
        (
            FingerprintKind::NormalizedText,
            format!("HTTP {}", response.status.unwrap_or(500)),
        )
    } else {
        match extract_trace(&body) {
            Some(trace) => (FingerprintKind::StackTrace, trace),
            None => (FingerprintKind::NormalizedText, normalize_text(&body)),
        }
    };
    let digest = hex_digest(&canonical);
    let exemplar = truncate_chars(&canonical, EXEMPLAR_CAP);
    FaultFingerprint { kind, digest, first_seen: seq, exemplar }
}

fn hex_digest(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

fn truncate_chars(text: &str, cap: usize) -> String {
    text.chars().take(cap).collect()
}

fn trace_line_patterns() -> &'static [Regex] {
    static PATTERNS: OnceLock<Vec<Regex>> = OnceLock::new();
    PATTERNS.get_or_init(|| {
        [
            // JVM frame: `at com.acme.Service.call(Service.java:42)`
            r"^\s*at\s+[\w$.<>/]+\(.*\)\s*$",
            // Exception header: `java.lang.IllegalStateException: boom`,
            // `KeyError: 'x'`; file/line and message payloads stay part of
            // the identity.
            r"^\s*[\w$.]*(?:Exception|Error)\b(?::.*)?$",
            r"^\s*Caused by:",
            r"^\s*\.\.\.\s+\d+\s+(?:more|common frames omitted)",
            // Python
            r"^Traceback \(most recent call last\):",
            r#"^\s*File ".+", line \d+"#,
            // Go
            r"^goroutine \d+ \[",
            r"^\s*\S+\.go:\d+",
        ]
        .iter()
        .map(|p| Regex::new(p).expect("static pattern compiles"))
        .collect()
    })
}

/// The trace lines of a body, or `None` when no line looks like one.
fn extract_trace(body: &str) -> Option<String> {
    let patterns = trace_line_patterns();
    let lines: Vec<&str> = body
        .lines()
        .filter(|line| patterns.iter().any(|p| p.is_match(line)))
        .collect();
    if lines.is_empty() {
        None
    } else {
        Some(lines.join("\n"))
    }
}

struct NormalizeRule {
    pattern: Regex,
    placeholder: &'static str,
}

fn normalize_rules() -> &'static [NormalizeRule] {
    static RULES: OnceLock<Vec<NormalizeRule>> = OnceLock::new();
    RULES.get_or_init(|| {
        // Order matters: timestamps before bare numbers, UUIDs before the
        // hex rule that would eat their groups.
        [
            (
                r"\b\d{4}-\d{2}-\d{2}(?:[T ]\d{2}:\d{2}:\d{2}(?:\.\d+)?(?:Z|[+-]\d{2}:?\d{2})?)?\b",
                "<TS>",
            ),
            (
                r"\b[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{12}\b",
                "<UUID>",
            ),
            (r"\b\d{10,}\b", "<EPOCH>"),
            (r"\b[0-9a-fA-F]{8,}\b", "<HEX>"),
        ]
        .iter()
        .map(|(pattern, placeholder)| NormalizeRule {
            pattern: Regex::new(pattern).expect("static pattern compiles"),
            placeholder,
        })
        .collect()
    })
}

/// Replace volatile tokens with fixed placeholders. Idempotent.
pub fn normalize_text(body: &str) -> String {
    let mut text = body.to_string();
    for rule in normalize_rules() {
        text = rule.pattern.replace_all(&text, rule.placeholder).into_owned();
    }
    text
}

/// Registry of unique faults with a reproducing request per fault.
#[derive(Debug, Default)]
pub struct FaultRegistry {
    entries: IndexMap<String, FaultEntry>,
}

#[derive(Debug, Clone)]
pub struct FaultEntry {
    pub fingerprint: FaultFingerprint,
    pub context: RequestPlan,
}

impl FaultRegistry {
    pub fn new() -> Self {
        FaultRegistry::default()
    }

    /// Record one fingerprint; true exactly on the first occurrence of its
    /// digest. The first occurrence keeps its reproducing request.
    pub fn register(&mut self, fp: FaultFingerprint, context: &RequestPlan) -> bool {
        if self.entries.contains_key(&fp.digest) {
            return false;
        }
        self.entries
            .insert(fp.digest.clone(), FaultEntry { fingerprint: fp, context: context.clone() });
        true
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Unique faults in first-seen order.
    pub fn entries(&self) -> impl Iterator<Item = &FaultEntry> {
        self.entries.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec_model::HttpMethod;
    use proptest::prelude::*;

    fn record(body: &str) -> ResponseRecord {
        ResponseRecord {
            status: Some(500),
            status_class: StatusClass::ServerError500,
            body: body.as_bytes().to_vec(),
            latency_ms: 1,
            error: None,
        }
    }

    fn plan() -> RequestPlan {
        RequestPlan {
            method: HttpMethod::Get,
            absolute_url: "http://h/x".to_string(),
            headers: vec![],
            body: None,
            operation_id: "x".to_string(),
            param_assignments: vec![],
        }
    }

    const JVM_TRACE_A: &str = "\
2024-03-01T10:00:00Z ERROR unhandled
java.lang.IllegalStateException: cycle in graph
    at com.acme.GraphWalker.walk(GraphWalker.java:118)
    at com.acme.Dispatcher.route(Dispatcher.java:17)";

    const JVM_TRACE_A_LATER: &str = "\
2024-03-02T23:59:59Z ERROR unhandled
java.lang.IllegalStateException: cycle in graph
    at com.acme.GraphWalker.walk(GraphWalker.java:118)
    at com.acme.Dispatcher.route(Dispatcher.java:17)";

    const JVM_TRACE_B: &str = "\
java.lang.NullPointerException
    at com.acme.UserService.load(UserService.java:42)";

    #[test]
    fn timestamps_around_a_trace_do_not_split_it() {
        let fp1 = fingerprint(&record(JVM_TRACE_A), 1);
        let fp2 = fingerprint(&record(JVM_TRACE_A_LATER), 2);
        assert_eq!(fp1.kind, FingerprintKind::StackTrace);
        assert_eq!(fp1.digest, fp2.digest);
        assert_eq!(fp1.first_seen, 1);
        assert_eq!(fp2.first_seen, 2);
    }

    #[test]
    fn distinct_traces_get_distinct_digests() {
        let fp1 = fingerprint(&record(JVM_TRACE_A), 1);
        let fp2 = fingerprint(&record(JVM_TRACE_B), 2);
        assert_ne!(fp1.digest, fp2.digest);
    }

    #[test]
    fn python_trace_is_recognized() {
        let body = "\
Traceback (most recent call last):
  File \"app/handlers.py\", line 77, in render
  File \"app/db.py\", line 12, in fetch
KeyError: 'price'";
        let fp = fingerprint(&record(body), 3);
        assert_eq!(fp.kind, FingerprintKind::StackTrace);
        assert!(fp.exemplar.contains("KeyError"));
    }

    #[test]
    fn json_body_normalizes_volatile_fields() {
        let a = r#"{"error":"NPE at UserService.java:42","ts":"2023-01-01T00:00:00Z"}"#;
        let b = r#"{"error":"NPE at UserService.java:42","ts":"2023-06-06T10:30:00Z"}"#;
        let fp_a = fingerprint(&record(a), 1);
        let fp_b = fingerprint(&record(b), 2);
        assert_eq!(fp_a.kind, FingerprintKind::NormalizedText);
        assert_eq!(fp_a.digest, fp_b.digest);

        // A date without a time component normalizes the same way.
        let c = r#"{"error":"NPE at UserService.java:42","ts":"2023-06-06"}"#;
        assert_eq!(fingerprint(&record(c), 3).digest, fp_a.digest);
    }

    #[test]
    fn uuids_epochs_and_hex_runs_normalize() {
        let text = "req 550e8400-e29b-41d4-a716-446655440000 at 1700000000001 token deadbeefcafe1234";
        let normalized = normalize_text(text);
        assert_eq!(normalized, "req <UUID> at <EPOCH> token <HEX>");
    }

    #[test]
    fn empty_body_fingerprints_on_status_line() {
        let fp = fingerprint(&record(""), 4);
        assert_eq!(fp.kind, FingerprintKind::NormalizedText);
        assert_eq!(fp.exemplar, "HTTP 500");
    }

    #[test]
    fn registry_has_set_semantics() {
        let mut registry = FaultRegistry::new();
        let fp = fingerprint(&record(JVM_TRACE_A), 1);
        assert!(registry.register(fp.clone(), &plan()));
        assert!(!registry.register(fp, &plan()));
        assert_eq!(registry.len(), 1);
    }

    #[test]
    fn interleaved_repeats_keep_three_uniques() {
        let mut registry = FaultRegistry::new();
        let bodies = [JVM_TRACE_A, JVM_TRACE_B, "plain failure", JVM_TRACE_A, "plain failure"];
        for (i, body) in bodies.iter().enumerate() {
            registry.register(fingerprint(&record(body), i as u64 + 1), &plan());
        }
        assert_eq!(registry.len(), 3);
        // first_seen keeps the first sequence number per digest
        assert_eq!(registry.entries().next().unwrap().fingerprint.first_seen, 1);
    }

    #[test]
    fn unique_count_never_exceeds_total() {
        let mut registry = FaultRegistry::new();
        let bodies = [JVM_TRACE_A, JVM_TRACE_A_LATER, JVM_TRACE_B];
        for (i, body) in bodies.iter().enumerate() {
            registry.register(fingerprint(&record(body), i as u64), &plan());
        }
        assert!(registry.len() <= bodies.len());
        assert_eq!(registry.len(), 2);
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(text in ".{0,200}") {
            let once = normalize_text(&text);
            let twice = normalize_text(&once);
            prop_assert_eq!(once, twice);
        }
    }

    #[test]
    fn normalization_idempotent_on_structured_samples() {
        let samples = [
            "ts 2024-01-02T03:04:05.678+02:00 id 550e8400-e29b-41d4-a716-446655440000",
            "epoch 1699999999999 hex deadbeef00 mixed 2024-05-05",
            JVM_TRACE_A,
        ];
        for sample in samples {
            let once = normalize_text(sample);
            assert_eq!(once, normalize_text(&once));
        }
    }
}
