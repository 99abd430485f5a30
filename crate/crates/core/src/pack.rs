//! Greedy packing: single-pass Pack, iterative rescoring (Pack_IH), the
//! surrogate-constrained variant (Pack_SF) and the heuristic-sequence driven
//! variant used by the hyper-heuristic (Pack_HH).
//!
//! All variants start from the empty plan and its objective as the incumbent,
//! tentatively add candidates in score order and keep an addition iff the
//! objective does not drop (`z >= z*`). Candidates that would break the
//! capacity constraint are skipped without evaluation. Score ties break by
//! ascending item id.

use std::cmp::Ordering;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TourContext;
use crate::objective::{evaluate, evaluate_delta, fits, Mode, PackingPlan};
use crate::report::SolveReport;
use crate::rewards::{score_item, Reward, RewardSpec, ScoreState};

/// Order in which scored candidates are considered.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SortOrder {
    /// Best score first.
    #[default]
    Descending,
    /// Worst score first (literal "non-decreasing" ordering, for ablation only).
    Ascending,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PackOptions {
    pub order: SortOrder,
    pub record_trace: bool,
}

/// One candidate consideration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    /// 1-based item id.
    pub item: usize,
    pub accepted: bool,
    /// Objective of the tentative plan; `None` for capacity skips.
    pub z: Option<f64>,
}

/// Plan, objective and bookkeeping of one greedy run.
#[derive(Debug, Clone)]
pub struct PackOutcome {
    pub plan: PackingPlan,
    pub objective: f64,
    pub evaluations: u64,
    pub trace: Vec<TraceStep>,
}

/// A finished run with its report.
#[derive(Debug, Clone)]
pub struct PackResult {
    pub plan: PackingPlan,
    pub report: SolveReport,
    pub trace: Vec<TraceStep>,
}

struct Run<'a> {
    ctx: &'a TourContext,
    mode: &'a Mode,
    options: PackOptions,
    plan: PackingPlan,
    best_z: f64,
    evaluations: u64,
    trace: Vec<TraceStep>,
}

impl<'a> Run<'a> {
    fn new(ctx: &'a TourContext, mode: &'a Mode, options: PackOptions) -> Result<Self> {
        let plan = PackingPlan::empty(ctx.instance());
        let best_z = evaluate(ctx, &plan)?;
        Ok(Run {
            ctx,
            mode,
            options,
            plan,
            best_z,
            evaluations: 1,
            trace: Vec::new(),
        })
    }

    fn record(&mut self, j: usize, accepted: bool, z: Option<f64>) {
        if self.options.record_trace {
            let step = self.trace.len();
            self.trace.push(TraceStep {
                step,
                item: j + 1,
                accepted,
                z,
            });
        }
    }

    /// Considers item slot `j`; returns whether it was added.
    fn consider(&mut self, j: usize) -> Result<bool> {
        if !fits(self.ctx, &self.plan, self.mode, j) {
            self.record(j, false, None);
            return Ok(false);
        }
        let z = evaluate_delta(self.ctx, &self.plan, j, self.best_z)?;
        self.evaluations += 1;
        if z >= self.best_z {
            self.plan.add(self.ctx.instance(), self.mode, j);
            self.best_z = z;
            self.record(j, true, Some(z));
            Ok(true)
        } else {
            self.record(j, false, Some(z));
            Ok(false)
        }
    }

    /// Sorts `items` by their score under `reward` against the current plan.
    fn ordered(&self, reward: RewardSpec, items: &[usize], state: &ScoreState) -> Vec<usize> {
        let mut scored: Vec<(usize, f64)> = items
            .iter()
            .map(|&j| {
                // Scoring fails only when the item cannot be carried at all,
                // so such items go last.
                let s = score_item(reward, self.ctx, state, self.mode, j).unwrap_or(f64::NAN);
                (j, s)
            })
            .collect();
        let order = self.options.order;
        scored.sort_by(|a, b| compare_scores(a, b, order));
        scored.into_iter().map(|(j, _)| j).collect()
    }

    /// Final objective, recomputed in full.
    fn finish(self) -> PackOutcome {
        let objective = evaluate(self.ctx, &self.plan).unwrap_or(self.best_z);
        PackOutcome {
            plan: self.plan,
            objective,
            evaluations: self.evaluations,
            trace: self.trace,
        }
    }
}

fn compare_scores(a: &(usize, f64), b: &(usize, f64), order: SortOrder) -> Ordering {
    let by_score = match (a.1.is_nan(), b.1.is_nan()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        (false, false) => match order {
            SortOrder::Descending => b.1.total_cmp(&a.1),
            SortOrder::Ascending => a.1.total_cmp(&b.1),
        },
    };
    by_score.then(a.0.cmp(&b.0))
}

/// Scores once against the empty plan and makes a single pass in score order.
fn single_pass(
    ctx: &TourContext,
    reward: RewardSpec,
    mode: &Mode,
    options: PackOptions,
) -> Result<PackOutcome> {
    let mut run = Run::new(ctx, mode, options)?;
    let all: Vec<usize> = (0..ctx.item_count()).collect();
    let state = ScoreState::new(ctx, &run.plan);
    for j in run.ordered(reward, &all, &state) {
        run.consider(j)?;
    }
    Ok(run.finish())
}

/// Cursor loop of Pack_IH: after every acceptance the remaining items are
/// rescored with `schedule(acceptances)`, re-sorted and the cursor restarts
/// at the top; rejections and capacity skips only advance the cursor.
fn rescoring_loop(
    ctx: &TourContext,
    mode: &Mode,
    options: PackOptions,
    schedule: impl Fn(usize) -> RewardSpec,
) -> Result<PackOutcome> {
    let mut run = Run::new(ctx, mode, options)?;
    if ctx.item_count() == 0 {
        return Ok(run.finish());
    }
    let mut state = ScoreState::new(ctx, &run.plan);
    let all: Vec<usize> = (0..ctx.item_count()).collect();
    let mut remaining = run.ordered(schedule(0), &all, &state);
    let mut accepted = 0;
    let mut cursor = 0;
    while cursor < remaining.len() {
        let j = remaining[cursor];
        if run.consider(j)? {
            accepted += 1;
            remaining.remove(cursor);
            state.refresh(ctx, &run.plan);
            remaining = run.ordered(schedule(accepted), &remaining, &state);
            cursor = 0;
        } else {
            cursor += 1;
        }
    }
    Ok(run.finish())
}

fn require(cond: bool, message: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(message()))
    }
}

fn result(
    algorithm: &str,
    reward: &str,
    mode: &Mode,
    outcome: PackOutcome,
    started: Instant,
) -> PackResult {
    let report = SolveReport::new(
        algorithm,
        reward,
        mode,
        &outcome.plan,
        outcome.objective,
        outcome.evaluations,
    )
    .with_runtime(started);
    PackResult {
        plan: outcome.plan,
        report,
        trace: outcome.trace,
    }
}

/// Original Pack with a one-time reward (r1, r2 or r3) under the
/// deterministic constraint.
pub fn pack_static(
    ctx: &TourContext,
    reward: RewardSpec,
    options: PackOptions,
) -> Result<PackResult> {
    require(
        matches!(reward.kind, Reward::R1 | Reward::R2 | Reward::R3),
        || {
            format!(
                "Pack takes a one-time reward (r1, r2, r3), not {}",
                reward.kind
            )
        },
    )?;
    let started = Instant::now();
    let mode = Mode::Deterministic;
    let outcome = single_pass(ctx, reward, &mode, options)?;
    Ok(result("pack", reward.kind.name(), &mode, outcome, started))
}

/// Pack_IH: rescoring after every acceptance, deterministic constraint.
/// Meant for r4/r5; r1-r3 are accepted and simply rescore to the same values.
pub fn pack_iterative(
    ctx: &TourContext,
    reward: RewardSpec,
    options: PackOptions,
) -> Result<PackResult> {
    require(!reward.kind.needs_chance(), || {
        format!(
            "{} needs a chance constraint; use pack_surrogate",
            reward.kind
        )
    })?;
    let started = Instant::now();
    let mode = Mode::Deterministic;
    let outcome = rescoring_loop(ctx, &mode, options, |_| reward)?;
    Ok(result(
        "pack_ih",
        reward.kind.name(),
        &mode,
        outcome,
        started,
    ))
}

/// Pack_SF under a chance constraint: feasibility through the surrogate
/// weight and the objective on expected weights.
///
/// r6/r7 are rescored with fresh increased expected weights after every
/// acceptance. r1 is a one-time reward and runs as a single pass, so with
/// `delta = 0` it coincides with [`pack_static`].
pub fn pack_surrogate(
    ctx: &TourContext,
    reward: RewardSpec,
    mode: &Mode,
    options: PackOptions,
) -> Result<PackResult> {
    require(mode.is_chance(), || {
        "pack_surrogate needs a chance constraint".to_string()
    })?;
    require(
        matches!(reward.kind, Reward::R1 | Reward::R6 | Reward::R7),
        || format!("Pack_SF takes r1, r6 or r7, not {}", reward.kind),
    )?;
    let started = Instant::now();
    let outcome = if reward.kind == Reward::R1 {
        single_pass(ctx, reward, mode, options)?
    } else {
        rescoring_loop(ctx, mode, options, |_| reward)?
    };
    Ok(result(
        "pack_sf",
        reward.kind.name(),
        mode,
        outcome,
        started,
    ))
}

/// Checks that `sequence` can drive [`pack_sequence`] under `mode`.
pub fn check_sequence(ctx: &TourContext, sequence: &[RewardSpec], mode: &Mode) -> Result<()> {
    require(sequence.len() == ctx.item_count(), || {
        format!(
            "heuristic sequence has {} entries but the instance has {} items",
            sequence.len(),
            ctx.item_count()
        )
    })?;
    if !mode.is_chance() {
        if let Some(bad) = sequence.iter().find(|r| r.kind.needs_chance()) {
            return Err(Error::Config(format!(
                "{} in the heuristic sequence needs a chance constraint",
                bad.kind
            )));
        }
    }
    Ok(())
}

/// Pack_HH without report bookkeeping; used inside the hyper-heuristic loop.
pub fn pack_sequence_outcome(
    ctx: &TourContext,
    sequence: &[RewardSpec],
    mode: &Mode,
    options: PackOptions,
) -> Result<PackOutcome> {
    check_sequence(ctx, sequence, mode)?;
    // At most m acceptances happen and the loop stops once nothing remains,
    // so the pointer never passes the end.
    rescoring_loop(ctx, mode, options, |accepted| {
        sequence[accepted.min(sequence.len() - 1)]
    })
}

/// Pack_HH: like Pack_IH, but the reward used after `a` acceptances is
/// `sequence[a]`. The sequence length must equal the item count.
pub fn pack_sequence(
    ctx: &TourContext,
    sequence: &[RewardSpec],
    mode: &Mode,
    options: PackOptions,
) -> Result<PackResult> {
    let started = Instant::now();
    let outcome = pack_sequence_outcome(ctx, sequence, mode, options)?;
    let mut res = result("pack_hh", "sequence", mode, outcome, started);
    res.report.sequence = Some(sequence.iter().map(|r| r.kind.name().to_string()).collect());
    Ok(res)
}

/// Runs the algorithm that goes with `reward` (r1-r3: Pack, r4-r5: Pack_IH,
/// chance mode: Pack_SF).
pub fn pack_for_reward(
    ctx: &TourContext,
    reward: RewardSpec,
    mode: &Mode,
    options: PackOptions,
) -> Result<PackResult> {
    match (mode, reward.kind) {
        (Mode::Chance(_), _) => pack_surrogate(ctx, reward, mode, options),
        (Mode::Deterministic, Reward::R1 | Reward::R2 | Reward::R3) => {
            pack_static(ctx, reward, options)
        }
        (Mode::Deterministic, Reward::R4 | Reward::R5) => pack_iterative(ctx, reward, options),
        (Mode::Deterministic, r) => Err(Error::Config(format!("{r} needs a chance constraint"))),
    }
}
