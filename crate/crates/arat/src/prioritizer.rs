//! ε-greedy selection of operation, parameter subset, and value source.
//!
//! Operation selection is a pure argmax over the mean parameter Q-value of
//! each operation. Parameter-subset and value-source selection are ε-greedy:
//! with probability 1−ε take the best-known choice, otherwise pick uniformly
//! at random. All ties break deterministically (document order for
//! operations and parameters, lowest index for sources), and the random
//! stream is consumed in a documented order so runs replay exactly.

use rand::Rng;
use serde::Serialize;

use crate::agent::AgentState;
use crate::spec_model::{ApiSpec, OperationSpec, ParamLocation, ParameterSpec};

/// The five value-mapping sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceId {
    /// S1 — example values mined from the specification.
    SpecExamples,
    /// S2 — random values generated from type, format, and constraints.
    RandomValue,
    /// S3 — key-value pairs harvested from earlier requests.
    RequestMemory,
    /// S4 — key-value pairs harvested from earlier responses.
    ResponseMemory,
    /// S5 — fixed per-type default values.
    Defaults,
}

impl SourceId {
    pub const COUNT: usize = 5;
    pub const ALL: [SourceId; SourceId::COUNT] = [
        SourceId::SpecExamples,
        SourceId::RandomValue,
        SourceId::RequestMemory,
        SourceId::ResponseMemory,
        SourceId::Defaults,
    ];

    /// Position in [`SourceId::ALL`]: S1 is 0, S5 is 4.
    pub fn index(self) -> usize {
        match self {
            SourceId::SpecExamples => 0,
            SourceId::RandomValue => 1,
            SourceId::RequestMemory => 2,
            SourceId::ResponseMemory => 3,
            SourceId::Defaults => 4,
        }
    }

    /// Short conventional label, `S1` through `S5`.
    pub fn label(self) -> &'static str {
        ["S1", "S2", "S3", "S4", "S5"][self.index()]
    }
}

/// Which arm of the ε-greedy split a selection took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionBranch {
    Exploit,
    Explore,
}

/// Pick the operation with the highest mean parameter Q-value.
///
/// An operation with no parameters scores 0. Ties keep the earliest
/// operation in document order. Consumes no randomness.
pub fn select_operation<'a>(state: &AgentState, spec: &'a ApiSpec) -> Option<&'a OperationSpec> {
    let mut best: Option<(&OperationSpec, f64)> = None;
    for op in &spec.operations {
        let mean = operation_mean_q(state, op);
        match best {
            Some((_, best_mean)) if mean <= best_mean => {}
            _ => best = Some((op, mean)),
        }
    }
    best.map(|(op, _)| op)
}

/// Mean of an operation's parameter Q-values; 0 when it has no parameters.
pub fn operation_mean_q(state: &AgentState, op: &OperationSpec) -> f64 {
    if op.parameters.is_empty() {
        return 0.0;
    }
    let sum: f64 = op
        .parameters
        .iter()
        .map(|p| state.param_q(&op.operation_id, &p.name).unwrap_or(0.0))
        .sum();
    sum / op.parameters.len() as f64
}

/// Select the parameter subset to fill in for one request.
///
/// Random stream consumption, in order: one draw for the subset size
/// `n ∈ [0, |params|]`, one `f64` for the ε branch, then (explore branch
/// only) `n` index draws for a uniform sample without replacement. The
/// exploit branch takes the top `n` parameters by Q-value, descending, ties
/// in document order. Required path parameters are always appended if the
/// draw left them out — a request with an unfilled path template cannot be
/// built at all.
pub fn select_parameters<'a, R: Rng>(
    op: &'a OperationSpec,
    state: &AgentState,
    rng: &mut R,
) -> Vec<&'a ParameterSpec> {
    select_parameters_traced(op, state, rng).0
}

/// [`select_parameters`] plus which ε branch was taken.
pub fn select_parameters_traced<'a, R: Rng>(
    op: &'a OperationSpec,
    state: &AgentState,
    rng: &mut R,
) -> (Vec<&'a ParameterSpec>, SelectionBranch) {
    let n = rng.gen_range(0..=op.parameters.len());
    let (mut picked, branch) = if rng.gen::<f64>() > state.epsilon {
        (exploit_parameters(op, state, n), SelectionBranch::Exploit)
    } else {
        (explore_parameters(op, n, rng), SelectionBranch::Explore)
    };
    append_missing_path_params(op, &mut picked);
    (picked, branch)
}

/// Uniform parameter selection, for the no-prioritization ablation: a size
/// draw followed by a uniform sample, path parameters appended as always.
pub fn uniform_parameters<'a, R: Rng>(op: &'a OperationSpec, rng: &mut R) -> Vec<&'a ParameterSpec> {
    let n = rng.gen_range(0..=op.parameters.len());
    let mut picked = explore_parameters(op, n, rng);
    append_missing_path_params(op, &mut picked);
    picked
}

fn exploit_parameters<'a>(
    op: &'a OperationSpec,
    state: &AgentState,
    n: usize,
) -> Vec<&'a ParameterSpec> {
    let mut order: Vec<usize> = (0..op.parameters.len()).collect();
    // Stable sort: equal Q-values keep document order.
    order.sort_by(|&a, &b| {
        let qa = state.param_q(&op.operation_id, &op.parameters[a].name).unwrap_or(0.0);
        let qb = state.param_q(&op.operation_id, &op.parameters[b].name).unwrap_or(0.0);
        qb.partial_cmp(&qa).unwrap_or(std::cmp::Ordering::Equal)
    });
    order.truncate(n);
    order.into_iter().map(|i| &op.parameters[i]).collect()
}

fn explore_parameters<'a, R: Rng>(
    op: &'a OperationSpec,
    n: usize,
    rng: &mut R,
) -> Vec<&'a ParameterSpec> {
    sample_without_replacement(op.parameters.len(), n, rng)
        .into_iter()
        .map(|i| &op.parameters[i])
        .collect()
}

fn append_missing_path_params<'a>(op: &'a OperationSpec, picked: &mut Vec<&'a ParameterSpec>) {
    for param in &op.parameters {
        if param.location == ParamLocation::Path
            && !picked.iter().any(|p| std::ptr::eq(*p, param))
        {
            picked.push(param);
        }
    }
}

/// Partial Fisher-Yates: a uniform `n`-subset of `0..len` in selection
/// order, consuming exactly `n` draws.
fn sample_without_replacement<R: Rng>(len: usize, n: usize, rng: &mut R) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..len).collect();
    let n = n.min(len);
    for i in 0..n {
        let j = rng.gen_range(i..len);
        indices.swap(i, j);
    }
    indices.truncate(n);
    indices
}

/// Select the value-mapping source for one request.
///
/// Consumes one `f64` for the ε branch, plus one index draw on the explore
/// branch. The exploit branch is the argmax over the operation's five source
/// Q-values, lowest index winning ties.
pub fn select_value_source<R: Rng>(
    op: &OperationSpec,
    state: &AgentState,
    rng: &mut R,
) -> SourceId {
    select_value_source_traced(op, state, rng).0
}

/// [`select_value_source`] plus which ε branch was taken.
pub fn select_value_source_traced<R: Rng>(
    op: &OperationSpec,
    state: &AgentState,
    rng: &mut R,
) -> (SourceId, SelectionBranch) {
    if rng.gen::<f64>() > state.epsilon {
        let qs = state
            .source_qs(&op.operation_id)
            .copied()
            .unwrap_or([0.0; SourceId::COUNT]);
        let mut best = SourceId::ALL[0];
        let mut best_q = f64::NEG_INFINITY;
        for source in SourceId::ALL {
            let q = qs[source.index()];
            if q > best_q {
                best_q = q;
                best = source;
            }
        }
        (best, SelectionBranch::Exploit)
    } else {
        (uniform_source(rng), SelectionBranch::Explore)
    }
}

/// Uniform source pick, consuming one draw.
pub fn uniform_source<R: Rng>(rng: &mut R) -> SourceId {
    SourceId::ALL[rng.gen_range(0..SourceId::COUNT)]
}

/// Uniform operation pick, consuming one draw; for the no-prioritization
/// ablation.
pub fn uniform_operation<'a, R: Rng>(spec: &'a ApiSpec, rng: &mut R) -> Option<&'a OperationSpec> {
    if spec.operations.is_empty() {
        return None;
    }
    Some(&spec.operations[rng.gen_range(0..spec.operations.len())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::initialize_qlearning;
    use crate::spec_model::{parse_spec, FormatHint};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use serde_json::json;

    fn features() -> (ApiSpec, AgentState) {
        let spec = parse_spec(
            crate::spec_model::FEATURES_EXCERPT_YAML.as_bytes(),
            FormatHint::Yaml,
        )
        .unwrap();
        let state = initialize_qlearning(&spec).unwrap();
        (spec, state)
    }

    fn query_ops_spec(doc: serde_json::Value) -> ApiSpec {
        parse_spec(doc.to_string().as_bytes(), FormatHint::Json).unwrap()
    }

    #[test]
    fn highest_mean_operation_wins() {
        let (spec, state) = features();
        // POST mean (2+2+1)/3 ≈ 1.667, GET mean (2+2)/2 = 2.0.
        let picked = select_operation(&state, &spec).unwrap();
        assert_eq!(picked.operation_id, "getConfigurationActivedFeatures");
    }

    #[test]
    fn single_operation_is_always_selected() {
        let spec = query_ops_spec(json!({
            "swagger": "2.0", "info": {"title": "t"},
            "paths": {"/only": {"get": {"operationId": "only",
                "responses": {"200": {"description": "ok"}}}}}
        }));
        let state = initialize_qlearning(&spec).unwrap();
        assert_eq!(select_operation(&state, &spec).unwrap().operation_id, "only");
    }

    #[test]
    fn mean_ties_keep_document_order() {
        let spec = query_ops_spec(json!({
            "swagger": "2.0", "info": {"title": "t"},
            "paths": {
                "/a": {"get": {"operationId": "first",
                    "parameters": [{"name": "x", "in": "query", "type": "string"}],
                    "responses": {"200": {"description": "ok"}}}},
                "/b": {"get": {"operationId": "second",
                    "parameters": [{"name": "y", "in": "query", "type": "string"}],
                    "responses": {"200": {"description": "ok"}}}}
            }
        }));
        let state = initialize_qlearning(&spec).unwrap();
        assert_eq!(select_operation(&state, &spec).unwrap().operation_id, "first");
    }

    #[test]
    fn exploit_takes_top_n_by_q_value() {
        let spec = query_ops_spec(json!({
            "swagger": "2.0", "info": {"title": "t"},
            "paths": {"/x": {"get": {"operationId": "op",
                "parameters": [
                    {"name": "c", "in": "query", "type": "string"},
                    {"name": "a", "in": "query", "type": "string"},
                    {"name": "b", "in": "query", "type": "string"}
                ],
                "responses": {"200": {"description": "ok"}}}}}
        }));
        let mut state = initialize_qlearning(&spec).unwrap();
        state.set_param_q("op", "a", 3.0);
        state.set_param_q("op", "b", 2.0);
        state.set_param_q("op", "c", 1.0);
        let picked = exploit_parameters(&spec.operations[0], &state, 2);
        let names: Vec<&str> = picked.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, vec!["a", "b"]);
    }

    #[test]
    fn zero_parameter_operation_selects_nothing() {
        let spec = query_ops_spec(json!({
            "swagger": "2.0", "info": {"title": "t"},
            "paths": {"/x": {"get": {"operationId": "op",
                "responses": {"200": {"description": "ok"}}}}}
        }));
        let state = initialize_qlearning(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(select_parameters(&spec.operations[0], &state, &mut rng).is_empty());
    }

    #[test]
    fn explore_branch_replays_with_same_seed() {
        let (spec, mut state) = features();
        state.epsilon = 1.0; // always explore
        let op = &spec.operations[0];

        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let picked = select_parameters(op, &state, &mut rng);

        // Replay the documented consumption order by hand.
        let mut replay = ChaCha8Rng::seed_from_u64(42);
        let n = replay.gen_range(0..=op.parameters.len());
        let _branch = replay.gen::<f64>();
        let mut expected = sample_without_replacement(op.parameters.len(), n, &mut replay)
            .into_iter()
            .map(|i| &op.parameters[i])
            .collect::<Vec<_>>();
        append_missing_path_params(op, &mut expected);

        let picked_names: Vec<&str> = picked.iter().map(|p| p.name.as_str()).collect();
        let expected_names: Vec<&str> = expected.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(picked_names, expected_names);
    }

    #[test]
    fn required_path_params_are_always_present() {
        let (spec, state) = features();
        let op = &spec.operations[0];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let picked = select_parameters(op, &state, &mut rng);
            for param in &op.parameters {
                assert!(picked.iter().any(|p| p.name == param.name), "path param dropped");
            }
        }
    }

    #[test]
    fn all_zero_sources_exploit_to_lowest_index() {
        let (spec, mut state) = features();
        state.epsilon = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let source = select_value_source(&spec.operations[0], &state, &mut rng);
        assert_eq!(source, SourceId::SpecExamples);
    }

    #[test]
    fn exploit_source_is_argmax() {
        let (spec, mut state) = features();
        state.epsilon = 0.0;
        let op_id = spec.operations[0].operation_id.clone();
        state.set_source_q(&op_id, SourceId::RequestMemory, 2.0);
        state.set_source_q(&op_id, SourceId::ResponseMemory, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let source = select_value_source(&spec.operations[0], &state, &mut rng);
        assert_eq!(source, SourceId::RequestMemory);
    }

    #[test]
    fn exploit_source_ignores_common_offset() {
        let (spec, mut state) = features();
        state.epsilon = 0.0;
        let op_id = spec.operations[0].operation_id.clone();
        state.set_source_q(&op_id, SourceId::RequestMemory, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let before = select_value_source(&spec.operations[0], &state, &mut rng);
        for source in SourceId::ALL {
            let old = state.source_qs(&op_id).unwrap()[source.index()];
            state.set_source_q(&op_id, source, old + 7.5);
        }
        let after = select_value_source(&spec.operations[0], &state, &mut rng);
        assert_eq!(before, after);
    }

    #[test]
    fn exploit_selections_are_pure() {
        let (spec, mut state) = features();
        state.epsilon = 0.0;
        let op = &spec.operations[1];
        // With ε = 0 the outcome depends only on the n draw, so two streams
        // that agree on n agree on the selection.
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        let pa: Vec<&str> =
            select_parameters(op, &state, &mut a).iter().map(|p| p.name.as_str()).collect();
        let pb: Vec<&str> =
            select_parameters(op, &state, &mut b).iter().map(|p| p.name.as_str()).collect();
        assert_eq!(pa, pb);
        assert_eq!(
            select_value_source(op, &state, &mut a),
            select_value_source(op, &state, &mut b)
        );
        assert_eq!(
            select_operation(&state, &spec).unwrap().operation_id,
            select_operation(&state, &spec).unwrap().operation_id
        );
    }

    proptest! {
        #[test]
        fn selection_is_subset_plus_path_params(seed in 0u64..500, eps in 0.0f64..=1.0) {
            let (spec, mut state) = features();
            state.epsilon = eps;
            let op = &spec.operations[0];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let picked = select_parameters(op, &state, &mut rng);
            // No duplicates, nothing foreign, every path param present.
            prop_assert!(picked.len() <= op.parameters.len());
            for (i, p) in picked.iter().enumerate() {
                prop_assert!(op.parameters.iter().any(|q| std::ptr::eq(q, *p)));
                prop_assert!(!picked[..i].iter().any(|q| std::ptr::eq(*q, *p)));
            }
            for param in op.parameters.iter().filter(|p| p.location == ParamLocation::Path) {
                prop_assert!(picked.iter().any(|p| p.name == param.name));
            }
        }
    }
}
