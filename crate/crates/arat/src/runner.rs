//! The testing loop, its configuration, and the report.
//!
//! One iteration = one request: select an operation, a parameter subset and
//! a value source, resolve values, send, then feed the outcome back into the
//! Q-tables and the key-value memory and grow ε. The loop runs until the
//! time budget or the optional request cap is reached and never aborts on a
//! per-request failure.
//!
//! A single seeded random stream drives every decision, consumed in a fixed
//! order per iteration (subset size, ε branches, explore draws, value
//! resolution, response sampling), so a (config, seed, fixture) triple
//! replays to an identical report.
//!
//! Ablation switches mirror the engine's three mechanisms: with
//! `no_prioritization` all three selectors become uniform random, with
//! `no_feedback` nothing is harvested into memory (memory-backed sources
//! then always fall back), and with `no_sampling` every flattened response
//! pair is stored instead of a sample.

use std::path::{Path, PathBuf};
use std::time::Instant;

use indexmap::IndexMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::agent::{
    initialize_qlearning_with, LearningParams, Outcome, StatusClass, UpdateRule,
};
use crate::executor::{build_request, HttpExecutor, ParamAssignment};
use crate::faults::{fingerprint, FaultRegistry, FingerprintKind};
use crate::memory::KeyValueMemory;
use crate::prioritizer::{
    select_operation, select_parameters_traced, select_value_source_traced, uniform_operation,
    uniform_parameters, uniform_source, SelectionBranch,
};
use crate::spec_model::{parse_spec, ApiSpec, FormatHint, SpecError};
use crate::values::resolve_with_fallback;

/// Everything one run needs; maps 1:1 to the CLI flags.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub spec_path: PathBuf,
    pub base_url: String,
    pub time_budget_s: f64,
    pub max_requests: Option<u64>,
    pub seed: u64,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub epsilon_max: f64,
    pub epsilon_adapt: f64,
    pub sample_size: usize,
    pub timeout_ms: u64,
    pub update_rule: UpdateRule,
    pub no_prioritization: bool,
    pub no_feedback: bool,
    pub no_sampling: bool,
    pub headers: Vec<(String, String)>,
    pub report_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(spec_path: impl Into<PathBuf>, base_url: impl Into<String>) -> Self {
        RunConfig {
            spec_path: spec_path.into(),
            base_url: base_url.into(),
            time_budget_s: 3600.0,
            max_requests: None,
            seed: 0,
            alpha: 0.1,
            gamma: 0.99,
            epsilon: 0.1,
            epsilon_max: 1.0,
            epsilon_adapt: 1.1,
            sample_size: 10,
            timeout_ms: 10_000,
            update_rule: UpdateRule::Alg3,
            no_prioritization: false,
            no_feedback: false,
            no_sampling: false,
            headers: Vec::new(),
            report_path: None,
        }
    }

    fn learning_params(&self) -> LearningParams {
        LearningParams {
            alpha: self.alpha,
            gamma: self.gamma,
            epsilon: self.epsilon,
            epsilon_max: self.epsilon_max,
            epsilon_adapt: self.epsilon_adapt,
            update_rule: self.update_rule,
        }
    }

    fn validate(&self) -> Result<(), RunError> {
        let bad = |msg: String| Err(RunError::Config(msg));
        if !self.time_budget_s.is_finite() || self.time_budget_s <= 0.0 {
            return bad(format!("time budget must be positive, got {}", self.time_budget_s));
        }
        match url::Url::parse(&self.base_url) {
            Ok(u) if u.scheme() == "http" || u.scheme() == "https" => {}
            Ok(u) => return bad(format!("base url scheme `{}` is not http(s)", u.scheme())),
            Err(e) => return bad(format!("base url does not parse: {e}")),
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must be in (0, 1], got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("gamma must be in [0, 1], got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad(format!("epsilon must be in [0, 1], got {}", self.epsilon));
        }
        if self.sample_size == 0 {
            return bad("sample size must be positive".to_string());
        }
        if self.timeout_ms == 0 {
            return bad("timeout must be positive".to_string());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("spec: {0}")]
    Spec(#[from] SpecError),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("internal: {0}")]
    Internal(String),
}

/// Counters for one operation.
#[derive(Debug, Clone, Default, Serialize)]
pub struct OperationReport {
    pub operation_id: String,
    pub requests: u64,
    pub success_2xx: u64,
    pub client_error_4xx: u64,
    pub server_error_500: u64,
    pub other: u64,
    /// Global request sequence number of this operation's first 2xx.
    pub first_2xx_seq: Option<u64>,
}

impl OperationReport {
    fn covered(&self) -> bool {
        self.success_2xx + self.client_error_4xx + self.server_error_500 > 0
    }
}

/// Run-wide counters; every total is the sum of the per-operation rows.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ReportTotals {
    pub requests: u64,
    /// Operations that saw at least one 2xx/4xx/500 response.
    pub operations_covered: u64,
    /// Valid plus fault-inducing requests (2xx + 500).
    pub requests_2xx_or_500: u64,
    pub success_2xx: u64,
    pub client_error_4xx: u64,
    pub server_error_500: u64,
    pub other: u64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunStats {
    /// 2xx response bodies that were not JSON and fed nothing into memory.
    pub skipped_non_json_bodies: u64,
    pub explore_decisions: u64,
    pub exploit_decisions: u64,
    pub final_epsilon: f64,
}

/// One unique fault with enough context to reproduce it.
#[derive(Debug, Clone, Serialize)]
pub struct FaultSummary {
    pub kind: FingerprintKind,
    pub digest: String,
    pub first_seen: u64,
    pub exemplar: String,
    pub operation_id: String,
    pub method: String,
    pub url: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub config: RunConfig,
    pub totals: ReportTotals,
    pub per_operation: Vec<OperationReport>,
    pub unique_faults: Vec<FaultSummary>,
    pub run_stats: RunStats,
    pub wall_time_s: f64,
}

impl TestReport {
    pub fn operation(&self, operation_id: &str) -> Option<&OperationReport> {
        self.per_operation.iter().find(|row| row.operation_id == operation_id)
    }
}

fn format_hint_for(path: &Path) -> FormatHint {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => FormatHint::Json,
        Some("yaml") | Some("yml") => FormatHint::Yaml,
        _ => FormatHint::Auto,
    }
}

/// Execute one full testing session against the configured service.
pub fn run(config: &RunConfig) -> Result<TestReport, RunError> {
    config.validate()?;
    let document = std::fs::read(&config.spec_path)?;
    let spec = parse_spec(&document, format_hint_for(&config.spec_path))?;
    run_on_spec(config, &spec)
}

/// [`run`] with an already-parsed spec (used by tests that build documents
/// in memory).
pub fn run_on_spec(config: &RunConfig, spec: &ApiSpec) -> Result<TestReport, RunError> {
    config.validate()?;
    let base = format!("{}{}", config.base_url.trim_end_matches('/'), spec.base_path);

    let mut state = initialize_qlearning_with(spec, config.learning_params())
        .map_err(|_| RunError::Spec(SpecError::EmptySpec))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut memory = KeyValueMemory::new();
    let mut registry = FaultRegistry::new();
    let executor = HttpExecutor::new();
    let mut stats = RunStats::default();

    let mut rows: IndexMap<String, OperationReport> = spec
        .operations
        .iter()
        .map(|op| {
            (
                op.operation_id.clone(),
                OperationReport { operation_id: op.operation_id.clone(), ..Default::default() },
            )
        })
        .collect();

    let started = Instant::now();
    let mut seq: u64 = 0;
    loop {
        if started.elapsed().as_secs_f64() >= config.time_budget_s {
            break;
        }
        if let Some(cap) = config.max_requests {
            if seq >= cap {
                break;
            }
        }

        let (op, params, source) = if config.no_prioritization {
            let op = uniform_operation(spec, &mut rng)
                .ok_or_else(|| RunError::Spec(SpecError::EmptySpec))?;
            let params = uniform_parameters(op, &mut rng);
            stats.explore_decisions += 2;
            (op, params, uniform_source(&mut rng))
        } else {
            let op = select_operation(&state, spec)
                .ok_or_else(|| RunError::Spec(SpecError::EmptySpec))?;
            let (params, param_branch) = select_parameters_traced(op, &state, &mut rng);
            let (source, source_branch) = select_value_source_traced(op, &state, &mut rng);
            for branch in [param_branch, source_branch] {
                match branch {
                    SelectionBranch::Explore => stats.explore_decisions += 1,
                    SelectionBranch::Exploit => stats.exploit_decisions += 1,
                }
            }
            (op, params, source)
        };

        let assignments: Vec<ParamAssignment> = params
            .iter()
            .map(|param| {
                let (value, note) = resolve_with_fallback(param, source, &memory, &mut rng);
                ParamAssignment { name: param.name.clone(), location: param.location, value, note }
            })
            .collect();

        let mut plan = build_request(op, assignments, &base)
            .map_err(|e| RunError::Internal(format!("request build failed: {e}")))?;
        plan.headers.extend(config.headers.iter().cloned());

        let record = executor.execute(&plan, config.timeout_ms);
        seq += 1;

        let row = rows.get_mut(&op.operation_id).expect("row exists for every operation");
        row.requests += 1;
        match record.status_class {
            StatusClass::Success2xx => {
                row.success_2xx += 1;
                row.first_2xx_seq.get_or_insert(seq);
            }
            StatusClass::ClientError4xx => row.client_error_4xx += 1,
            StatusClass::ServerError500 => row.server_error_500 += 1,
            StatusClass::Other => row.other += 1,
        }

        if record.status_class == StatusClass::ServerError500 {
            registry.register(fingerprint(&record, seq), &plan);
        }

        let sent_pairs: Vec<(String, Value)> = plan
            .param_assignments
            .iter()
            .map(|a| (a.name.clone(), a.value.clone()))
            .collect();

        if !config.no_feedback && record.status_class == StatusClass::Success2xx {
            memory.record_from_request(&sent_pairs, record.status_class);
            let sample = if config.no_sampling { None } else { Some(config.sample_size) };
            if memory.record_from_response(&record.body, sample, &mut rng).is_none() {
                stats.skipped_non_json_bodies += 1;
            }
        }

        let outcome = Outcome {
            operation_id: op.operation_id.clone(),
            selected_params: sent_pairs,
            selected_source: source,
            status_class: record.status_class,
        };
        state
            .q_update(&outcome)
            .map_err(|e| RunError::Internal(format!("q-update failed: {e}")))?;
        state.adapt_epsilon();
    }

    stats.final_epsilon = state.epsilon;
    Ok(assemble_report(config, rows, &registry, stats, started.elapsed().as_secs_f64()))
}

fn assemble_report(
    config: &RunConfig,
    rows: IndexMap<String, OperationReport>,
    registry: &FaultRegistry,
    run_stats: RunStats,
    wall_time_s: f64,
) -> TestReport {
    let mut totals = ReportTotals::default();
    for row in rows.values() {
        totals.requests += row.requests;
        totals.success_2xx += row.success_2xx;
        totals.client_error_4xx += row.client_error_4xx;
        totals.server_error_500 += row.server_error_500;
        totals.other += row.other;
        if row.covered() {
            totals.operations_covered += 1;
        }
    }
    totals.requests_2xx_or_500 = totals.success_2xx + totals.server_error_500;

    let unique_faults = registry
        .entries()
        .map(|entry| FaultSummary {
            kind: entry.fingerprint.kind,
            digest: entry.fingerprint.digest.clone(),
            first_seen: entry.fingerprint.first_seen,
            exemplar: entry.fingerprint.exemplar.clone(),
            operation_id: entry.context.operation_id.clone(),
            method: entry.context.method.as_str().to_string(),
            url: entry.context.absolute_url.clone(),
        })
        .collect();

    TestReport {
        config: config.clone(),
        totals,
        per_operation: rows.into_values().collect(),
        unique_faults,
        run_stats,
        wall_time_s,
    }
}

/// Write the report as pretty-printed JSON. Emitting the same report twice
/// produces byte-identical files.
pub fn emit_report(report: &TestReport, path: &Path) -> std::io::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(report)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)
}

/// A human-readable view of the same numbers, for standard output.
pub fn render_table(report: &TestReport) -> String {
    let mut out = String::new();
    let push = |out: &mut String, line: String| {
        out.push_str(&line);
        out.push('\n');
    };
    push(&mut out, format!("{:<40} {:>8} {:>7} {:>7} {:>7} {:>7}",
        "operation", "reqs", "2xx", "4xx", "500", "other"));
    for row in &report.per_operation {
        push(&mut out, format!(
            "{:<40} {:>8} {:>7} {:>7} {:>7} {:>7}",
            row.operation_id,
            row.requests,
            row.success_2xx,
            row.client_error_4xx,
            row.server_error_500,
            row.other,
        ));
    }
    let t = &report.totals;
    push(&mut out, format!(
        "total: {} requests, {} operations covered, {} valid+fault (2xx {}, 500 {}), {} unique faults",
        t.requests,
        t.operations_covered,
        t.requests_2xx_or_500,
        t.success_2xx,
        t.server_error_500,
        report.unique_faults.len(),
    ));
    out
}
