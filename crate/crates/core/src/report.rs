use serde::{Deserialize, Serialize};

use crate::objective::{surrogate_weight, Bound, Mode, PackingPlan};

/// Outcome of one solver run, serialized as the JSON report of the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// `pack`, `pack_ih`, `pack_sf`, `pack_hh`, `hh` or `oracle`.
    pub algorithm: String,
    /// Reward name (`r1`..`r7`) or hyper-heuristic variant (`HH1`..`HH6`).
    pub reward: String,
    /// `deterministic` or `chance`.
    pub mode: String,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    /// Bound actually applied (never `auto`).
    pub bound: Option<Bound>,
    pub seed: Option<u64>,
    pub objective: f64,
    pub total_weight: f64,
    pub surrogate_weight: Option<f64>,
    /// Packed 1-based item ids in ascending order.
    pub items: Vec<usize>,
    /// Objective evaluations performed.
    pub evaluations: u64,
    pub runtime_ms: f64,
    /// Final heuristic sequence of a hyper-heuristic run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<String>>,
    /// Incumbent objective after initialization and after every iteration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<f64>>,
}

impl SolveReport {
    pub fn new(
        algorithm: &str,
        reward: &str,
        mode: &Mode,
        plan: &PackingPlan,
        objective: f64,
        evaluations: u64,
    ) -> Self {
        let spec = mode.spec();
        SolveReport {
            algorithm: algorithm.to_string(),
            reward: reward.to_string(),
            mode: mode.name().to_string(),
            alpha: spec.map(|s| s.alpha),
            delta: spec.map(|s| s.delta),
            bound: spec.map(|s| s.resolved_bound()),
            seed: None,
            objective,
            total_weight: plan.total_weight(),
            surrogate_weight: spec.map(|s| surrogate_weight(plan, s)),
            items: plan.selected_ids(),
            evaluations,
            runtime_ms: 0.0,
            sequence: None,
            trajectory: None,
        }
    }

    pub fn with_runtime(mut self, started: std::time::Instant) -> Self {
        self.runtime_ms = started.elapsed().as_secs_f64() * 1e3;
        self
    }
}
