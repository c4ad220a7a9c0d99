//! Q-learning state and updates.
//!
//! The agent keeps two tables, both keyed by operation id:
//!
//! - a parameter Q-table, `operation -> parameter name -> Q`, seeded from how
//!   often each parameter name occurs across the whole document (a name
//!   mentioned by many operations starts out important);
//! - per-operation value-source Q-values, `operation -> source -> Q`, seeded
//!   to zero.
//!
//! After every request the Q-values of exactly the parameters that were sent
//! and the source that was selected are rewritten with the update rule:
//! reward −1 for a 2xx response (move on, this works already), +1 for 4xx or
//! exactly 500 (stay, something is brittle here). Any other status class
//! leaves the tables untouched.

use indexmap::IndexMap;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::prioritizer::SourceId;
use crate::spec_model::ApiSpec;

/// Coarse classification of an HTTP response for reward purposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusClass {
    Success2xx,
    ClientError4xx,
    ServerError500,
    /// 1xx/3xx, 5xx other than 500, and transport failures.
    Other,
}

impl StatusClass {
    /// Classify a status code; `None` (no response at all) maps to `Other`.
    pub fn from_status(status: Option<u16>) -> Self {
        match status {
            Some(s) if (200..300).contains(&s) => StatusClass::Success2xx,
            Some(s) if (400..500).contains(&s) => StatusClass::ClientError4xx,
            Some(500) => StatusClass::ServerError500,
            _ => StatusClass::Other,
        }
    }

    /// The reward this class feeds into the update rule.
    pub fn reward(self) -> i8 {
        match self {
            StatusClass::Success2xx => -1,
            StatusClass::ClientError4xx | StatusClass::ServerError500 => 1,
            StatusClass::Other => 0,
        }
    }
}

/// Which form of the update rule to apply.
///
/// The two differ in where the discount factor bites:
/// `Alg3` computes `old + α·(r + γ·(max_next − old))`, while `Eq1` is the
/// textbook `old + α·(r + γ·max_next − old)`. `Alg3` is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum UpdateRule {
    #[default]
    Alg3,
    Eq1,
}

impl UpdateRule {
    /// One application of the update rule, as a pure function.
    pub fn apply(self, old: f64, reward: f64, max_next: f64, alpha: f64, gamma: f64) -> f64 {
        match self {
            UpdateRule::Alg3 => old + alpha * (reward + gamma * (max_next - old)),
            UpdateRule::Eq1 => old + alpha * (reward + gamma * max_next - old),
        }
    }
}

/// Learning parameters, with the defaults the engine starts from.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LearningParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub epsilon_max: f64,
    pub epsilon_adapt: f64,
    pub update_rule: UpdateRule,
}

impl Default for LearningParams {
    fn default() -> Self {
        LearningParams {
            alpha: 0.1,
            gamma: 0.99,
            epsilon: 0.1,
            epsilon_max: 1.0,
            epsilon_adapt: 1.1,
            update_rule: UpdateRule::Alg3,
        }
    }
}

/// The result of one executed request, as the agent sees it.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub operation_id: String,
    /// Every (name, value) pair that was actually sent, in send order.
    pub selected_params: Vec<(String, Value)>,
    pub selected_source: SourceId,
    pub status_class: StatusClass,
}

impl Outcome {
    pub fn reward(&self) -> i8 {
        self.status_class.reward()
    }
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("specification declares zero operations")]
    EmptySpec,
    #[error("unknown operation `{0}`")]
    UnknownOperation(String),
}

/// Mutable Q-learning state for one testing session.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub epsilon_max: f64,
    pub epsilon_adapt: f64,
    pub update_rule: UpdateRule,
    q_table: IndexMap<String, IndexMap<String, f64>>,
    q_value: IndexMap<String, [f64; SourceId::COUNT]>,
}

/// Build the initial agent state from a parsed spec, using default learning
/// parameters (α 0.1, γ 0.99, ε 0.1, ε_max 1, ε_adapt 1.1).
///
/// Parameter Q-values start as frequency counts, accumulated in one pass over
/// the operations in document order: each occurrence of a parameter name adds
/// one, and each response-schema key that matches an already-counted name
/// adds one more. Every operation then gets its own copy of the counts for
/// its parameters, so later updates stay per-operation. Source Q-values all
/// start at zero. No API calls happen here.
pub fn initialize_qlearning(spec: &ApiSpec) -> Result<AgentState, AgentError> {
    initialize_qlearning_with(spec, LearningParams::default())
}

/// [`initialize_qlearning`] with explicit learning parameters.
pub fn initialize_qlearning_with(
    spec: &ApiSpec,
    params: LearningParams,
) -> Result<AgentState, AgentError> {
    if spec.operations.is_empty() {
        return Err(AgentError::EmptySpec);
    }

    let mut counts: IndexMap<String, f64> = IndexMap::new();
    for op in &spec.operations {
        for param in &op.parameters {
            *counts.entry(param.name.clone()).or_insert(0.0) += 1.0;
        }
        for key in &op.response_keys {
            if let Some(count) = counts.get_mut(key) {
                *count += 1.0;
            }
        }
    }

    let mut q_table = IndexMap::new();
    let mut q_value = IndexMap::new();
    for op in &spec.operations {
        let mut per_op: IndexMap<String, f64> = IndexMap::new();
        for param in &op.parameters {
            let count = counts.get(&param.name).copied().unwrap_or(0.0);
            per_op.entry(param.name.clone()).or_insert(count);
        }
        q_table.insert(op.operation_id.clone(), per_op);
        q_value.insert(op.operation_id.clone(), [0.0; SourceId::COUNT]);
    }

    Ok(AgentState {
        alpha: params.alpha,
        gamma: params.gamma,
        epsilon: params.epsilon,
        epsilon_max: params.epsilon_max,
        epsilon_adapt: params.epsilon_adapt,
        update_rule: params.update_rule,
        q_table,
        q_value,
    })
}

impl AgentState {
    /// The per-operation parameter Q-values, in first-seen parameter order.
    pub fn param_qs(&self, operation_id: &str) -> Option<&IndexMap<String, f64>> {
        self.q_table.get(operation_id)
    }

    pub fn param_q(&self, operation_id: &str, param_name: &str) -> Option<f64> {
        self.q_table.get(operation_id)?.get(param_name).copied()
    }

    /// The five value-source Q-values of one operation, indexed by
    /// [`SourceId::index`].
    pub fn source_qs(&self, operation_id: &str) -> Option<&[f64; SourceId::COUNT]> {
        self.q_value.get(operation_id)
    }

    /// Overwrite one parameter Q-value (test fixtures, what-if exploration).
    pub fn set_param_q(&mut self, operation_id: &str, param_name: &str, q: f64) {
        if let Some(params) = self.q_table.get_mut(operation_id) {
            params.insert(param_name.to_string(), q);
        }
    }

    /// Overwrite one source Q-value.
    pub fn set_source_q(&mut self, operation_id: &str, source: SourceId, q: f64) {
        if let Some(qs) = self.q_value.get_mut(operation_id) {
            qs[source.index()] = q;
        }
    }

    /// Apply one outcome to the tables.
    ///
    /// The selected source's Q-value is rewritten first, with `max_next`
    /// taken over the operation's five source Q-values. Then each sent
    /// parameter is rewritten in send order, with `max_next` re-read from the
    /// table as it stands at that point in the loop, so earlier writes in the
    /// same update are visible to later ones. A reward of zero (status class
    /// `Other`) performs no update at all.
    pub fn q_update(&mut self, outcome: &Outcome) -> Result<(), AgentError> {
        let op_id = outcome.operation_id.as_str();
        if !self.q_table.contains_key(op_id) || !self.q_value.contains_key(op_id) {
            return Err(AgentError::UnknownOperation(op_id.to_string()));
        }
        let reward = f64::from(outcome.reward());
        if reward == 0.0 {
            return Ok(());
        }

        let sources = self.q_value.get_mut(op_id).expect("checked above");
        let max_next = sources.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let old = sources[outcome.selected_source.index()];
        sources[outcome.selected_source.index()] =
            self.update_rule.apply(old, reward, max_next, self.alpha, self.gamma);

        let params = self.q_table.get_mut(op_id).expect("checked above");
        for (name, _) in &outcome.selected_params {
            let Some(&old) = params.get(name) else { continue };
            let max_next = params.values().copied().fold(f64::NEG_INFINITY, f64::max);
            params.insert(
                name.clone(),
                self.update_rule.apply(old, reward, max_next, self.alpha, self.gamma),
            );
        }
        Ok(())
    }

    /// Grow the exploration rate: `ε ← min(ε_max, ε_adapt · ε)`.
    pub fn adapt_epsilon(&mut self) {
        self.epsilon = (self.epsilon_adapt * self.epsilon).min(self.epsilon_max);
    }
}
