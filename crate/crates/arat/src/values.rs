//! Concrete value materialization for the five sources.
//!
//! S1 draws from example values mined out of the document, S2 generates
//! random values honoring declared constraints, S3/S4 look keys up in the
//! request/response memory by Gestalt similarity, and S5 uses fixed
//! per-type defaults. A source with nothing to offer reports
//! [`ValueError::SourceEmpty`] and [`resolve_with_fallback`] substitutes the
//! next source in the chain, recording what actually happened in the
//! [`ResolutionNote`].

use std::collections::HashMap;

use rand::distributions::Alphanumeric;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::memory::{KeyValueMemory, StoredPair};
use crate::prioritizer::SourceId;
use crate::spec_model::{ParameterSpec, PrimitiveType};

/// Ratcliff/Obershelp similarity of two strings, in `[0, 1]`.
///
/// The ratio is `2K / (|a| + |b|)` where `K` counts the characters matched
/// by recursively taking a longest common substring and descending into the
/// unmatched pieces on either side. When several longest substrings exist,
/// `K` is the maximum over the choices, which makes the result symmetric in
/// its arguments. Comparison is case-sensitive and per `char`. Two empty
/// strings rate 1.0; one empty string rates 0.0.
pub fn gestalt_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let matched = matched_chars(&a, &b);
    2.0 * matched as f64 / (a.len() + b.len()) as f64
}

type Window = (usize, usize, usize, usize);

fn matched_chars(a: &[char], b: &[char]) -> usize {
    let mut memo: HashMap<Window, usize> = HashMap::new();
    // Work budget against adversarial long periodic keys; beyond it the
    // remaining tie choices degrade to first-found.
    let mut budget: usize = 50_000_000;
    matched_window(a, b, (0, a.len(), 0, b.len()), &mut memo, &mut budget)
}

fn matched_window(
    a: &[char],
    b: &[char],
    window: Window,
    memo: &mut HashMap<Window, usize>,
    budget: &mut usize,
) -> usize {
    let (a_lo, a_hi, b_lo, b_hi) = window;
    if a_lo >= a_hi || b_lo >= b_hi {
        return 0;
    }
    if let Some(&cached) = memo.get(&window) {
        return cached;
    }
    let (len, starts) = maximal_common_substrings(a, b, window, budget);
    let mut best = 0;
    if len > 0 {
        for (a_start, b_start) in starts {
            let total = len
                + matched_window(a, b, (a_lo, a_start, b_lo, b_start), memo, budget)
                + matched_window(a, b, (a_start + len, a_hi, b_start + len, b_hi), memo, budget);
            best = best.max(total);
            if *budget == 0 {
                break;
            }
        }
    }
    memo.insert(window, best);
    best
}

/// Length of the longest common substring inside the window and every
/// start-position pair achieving it.
fn maximal_common_substrings(
    a: &[char],
    b: &[char],
    (a_lo, a_hi, b_lo, b_hi): Window,
    budget: &mut usize,
) -> (usize, Vec<(usize, usize)>) {
    let b_width = b_hi - b_lo;
    let mut prev = vec![0usize; b_width + 1];
    let mut row = vec![0usize; b_width + 1];
    let mut best_len = 0;
    let mut starts = Vec::new();
    for i in a_lo..a_hi {
        for j in b_lo..b_hi {
            let run = if a[i] == b[j] { prev[j - b_lo] + 1 } else { 0 };
            row[j - b_lo + 1] = run;
            if run > best_len {
                best_len = run;
                starts.clear();
                starts.push((i + 1 - run, j + 1 - run));
            } else if run == best_len && run > 0 {
                starts.push((i + 1 - run, j + 1 - run));
            }
        }
        std::mem::swap(&mut prev, &mut row);
    }
    *budget = budget.saturating_sub((a_hi - a_lo) * b_width);
    (best_len, starts)
}

/// How a parameter's value was actually obtained.
#[derive(Debug, Clone, Serialize)]
pub struct ResolutionNote {
    /// The source the selector asked for.
    pub requested: SourceId,
    /// The source that produced the value (differs on fallback).
    pub used: SourceId,
    /// For memory lookups, the stored key the value came from.
    pub matched_key: Option<String>,
}

#[derive(Debug, Error)]
pub enum ValueError {
    #[error("{} has no value to offer for `{1}`", .0.label())]
    SourceEmpty(SourceId, String),
    #[error("cannot generate a value for pattern `{0}`")]
    UnsatisfiablePattern(String),
}

/// Materialize a value for `param` from `source`.
pub fn resolve_value<R: Rng>(
    param: &ParameterSpec,
    source: SourceId,
    memory: &KeyValueMemory,
    rng: &mut R,
) -> Result<(Value, ResolutionNote), ValueError> {
    let note = |matched_key| ResolutionNote { requested: source, used: source, matched_key };
    match source {
        SourceId::SpecExamples => {
            if param.example_candidates.is_empty() {
                return Err(ValueError::SourceEmpty(source, param.name.clone()));
            }
            let pick = rng.gen_range(0..param.example_candidates.len());
            Ok((param.example_candidates[pick].clone(), note(None)))
        }
        SourceId::RandomValue => Ok((random_value(param, rng)?, note(None))),
        SourceId::RequestMemory => {
            let pair = best_match(&param.name, memory.request_pairs())
                .ok_or_else(|| ValueError::SourceEmpty(source, param.name.clone()))?;
            Ok((pair.value.clone(), note(Some(pair.key.clone()))))
        }
        SourceId::ResponseMemory => {
            let pair = best_match(&param.name, memory.response_pairs())
                .ok_or_else(|| ValueError::SourceEmpty(source, param.name.clone()))?;
            Ok((pair.value.clone(), note(Some(pair.key.clone()))))
        }
        SourceId::Defaults => Ok((default_value(param.primitive_type), note(None))),
    }
}

/// [`resolve_value`] with the fallback chain: the chosen source, then
/// constrained random (S2), then — should even that fail on an impossible
/// pattern — an unconstrained random string. Always yields a value; the
/// note records the substitution.
pub fn resolve_with_fallback<R: Rng>(
    param: &ParameterSpec,
    requested: SourceId,
    memory: &KeyValueMemory,
    rng: &mut R,
) -> (Value, ResolutionNote) {
    match resolve_value(param, requested, memory, rng) {
        Ok(pair) => pair,
        Err(_) => {
            if requested != SourceId::RandomValue {
                if let Ok((value, mut note)) =
                    resolve_value(param, SourceId::RandomValue, memory, rng)
                {
                    note.requested = requested;
                    return (value, note);
                }
            }
            let value = Value::String(random_string(rng, 1, 20));
            let note = ResolutionNote {
                requested,
                used: SourceId::RandomValue,
                matched_key: None,
            };
            (value, note)
        }
    }
}

/// The stored pair whose key is most similar to `name`; ties go to the most
/// recently stored pair. No similarity cutoff: the reward loop, not a
/// threshold, is what corrects bad matches.
fn best_match<'m>(
    name: &str,
    pairs: impl Iterator<Item = &'m StoredPair>,
) -> Option<&'m StoredPair> {
    let mut best: Option<(f64, &StoredPair)> = None;
    for pair in pairs {
        let score = gestalt_similarity(name, &pair.key);
        if best.map_or(true, |(best_score, _)| score >= best_score) {
            best = Some((score, pair));
        }
    }
    best.map(|(_, pair)| pair)
}

/// A random value honoring the parameter's type, format, and constraints.
///
/// Declared enum members win outright; a `pattern` is generated via the
/// regex syntax tree and verified against the original expression; numeric
/// bounds clamp the draw; `date`/`date-time` formats yield valid ISO-8601
/// calendar values; unconstrained strings are 1-20 alphanumeric characters.
pub fn random_value<R: Rng>(param: &ParameterSpec, rng: &mut R) -> Result<Value, ValueError> {
    let constraints = &param.constraints;
    if let Some(members) = &constraints.enum_values {
        if !members.is_empty() {
            return Ok(members[rng.gen_range(0..members.len())].clone());
        }
    }
    if let Some(pattern) = &constraints.pattern {
        return generate_from_pattern(pattern, rng);
    }
    let value = match param.primitive_type {
        PrimitiveType::String => match param.format.as_deref() {
            Some("date") => Value::String(random_date(rng)),
            Some("date-time") => Value::String(format!(
                "{}T{:02}:{:02}:{:02}Z",
                random_date(rng),
                rng.gen_range(0..24),
                rng.gen_range(0..60),
                rng.gen_range(0..60),
            )),
            _ => {
                let lo = constraints.min_length.unwrap_or(1) as usize;
                let hi = (constraints.max_length.unwrap_or(20.max(lo as u64)) as usize).max(lo);
                Value::String(random_string(rng, lo, hi))
            }
        },
        PrimitiveType::Integer => {
            let lo = constraints.minimum.map(|m| m.ceil() as i64).unwrap_or(-1_000_000);
            let hi = constraints.maximum.map(|m| m.floor() as i64).unwrap_or(1_000_000);
            json!(rng.gen_range(lo..=hi.max(lo)))
        }
        PrimitiveType::Number => {
            let lo = constraints.minimum.unwrap_or(-1_000_000.0);
            let hi = constraints.maximum.unwrap_or(1_000_000.0).max(lo);
            json!(rng.gen_range(lo..=hi))
        }
        PrimitiveType::Boolean => json!(rng.gen::<bool>()),
        PrimitiveType::Array => json!([]),
        PrimitiveType::Object => json!({}),
    };
    Ok(value)
}

/// Fixed per-type defaults (S5).
pub fn default_value(primitive_type: PrimitiveType) -> Value {
    match primitive_type {
        PrimitiveType::String => json!("string"),
        PrimitiveType::Number => json!(1.1),
        PrimitiveType::Integer => json!(1),
        PrimitiveType::Boolean => json!(true),
        PrimitiveType::Array => json!([]),
        PrimitiveType::Object => json!({}),
    }
}

fn random_string<R: Rng>(rng: &mut R, min_len: usize, max_len: usize) -> String {
    let len = rng.gen_range(min_len..=max_len.max(min_len));
    rng.sample_iter(&Alphanumeric).take(len).map(char::from).collect()
}

fn random_date<R: Rng>(rng: &mut R) -> String {
    // Day capped at 28 so every (year, month) combination is valid.
    format!(
        "{:04}-{:02}-{:02}",
        rng.gen_range(1970..=2099),
        rng.gen_range(1..=12),
        rng.gen_range(1..=28),
    )
}

/// Generate a string matching `pattern`, verified against the original
/// expression afterwards.
fn generate_from_pattern<R: Rng>(pattern: &str, rng: &mut R) -> Result<Value, ValueError> {
    let unsat = || ValueError::UnsatisfiablePattern(pattern.to_string());
    // The generator has no notion of anchors: a full string is produced, so
    // `^...$` framing is redundant. Strip one layer of it.
    let mut core = pattern.strip_prefix('^').unwrap_or(pattern);
    if core.ends_with('$') && !core.ends_with("\\$") {
        core = &core[..core.len() - 1];
    }
    let mut parser = regex_syntax::ParserBuilder::new().unicode(false).utf8(true).build();
    let hir = parser.parse(core).map_err(|_| unsat())?;
    let generator = rand_regex::Regex::with_hir(hir, 8).map_err(|_| unsat())?;
    let candidate: String = rng.sample(&generator);
    let verifier = regex::Regex::new(pattern).map_err(|_| unsat())?;
    if verifier.is_match(&candidate) {
        Ok(Value::String(candidate))
    } else {
        Err(unsat())
    }
}
