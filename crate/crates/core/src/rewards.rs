//! Item reward functions r1-r7 and the increased expected weight used by the
//! stochastic variants.
//!
//! r1-r3 are one-time scores computed before packing starts. r4-r7 depend on
//! the suffix weight `W_i` of already picked items and are recomputed after
//! every acceptance. The suffix weight of a city counts only picked items at
//! the same or a later tour position; items picked earlier in the tour are
//! ignored even though they are carried over the same legs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Item, TourContext};
use crate::objective::{travel_speed, Bound, Mode, PackingPlan, StochasticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Reward {
    #[serde(rename = "r1")]
    R1,
    #[serde(rename = "r2")]
    R2,
    #[serde(rename = "r3")]
    R3,
    #[serde(rename = "r4")]
    R4,
    #[serde(rename = "r5")]
    R5,
    #[serde(rename = "r6")]
    R6,
    #[serde(rename = "r7")]
    R7,
}

impl Reward {
    pub const ALL: [Reward; 7] = [
        Reward::R1,
        Reward::R2,
        Reward::R3,
        Reward::R4,
        Reward::R5,
        Reward::R6,
        Reward::R7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Reward::R1 => "r1",
            Reward::R2 => "r2",
            Reward::R3 => "r3",
            Reward::R4 => "r4",
            Reward::R5 => "r5",
            Reward::R6 => "r6",
            Reward::R7 => "r7",
        }
    }

    /// True for rewards that depend on the current packing (r4-r7).
    pub fn is_iterative(self) -> bool {
        matches!(self, Reward::R4 | Reward::R5 | Reward::R6 | Reward::R7)
    }

    /// True for rewards that need a stochastic spec (r6, r7).
    pub fn needs_chance(self) -> bool {
        matches!(self, Reward::R6 | Reward::R7)
    }
}

impl fmt::Display for Reward {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Reward {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Reward::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown reward {s:?}")))
    }
}

/// A reward function together with the r1 exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSpec {
    pub kind: Reward,
    pub gamma: f64,
}

impl RewardSpec {
    pub const fn new(kind: Reward) -> Self {
        RewardSpec { kind, gamma: 1.0 }
    }

    pub fn with_gamma(kind: Reward, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::Config(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if kind != Reward::R1 && gamma != 1.0 {
            return Err(Error::Config(format!(
                "the exponent gamma applies to r1 only, not {kind}"
            )));
        }
        Ok(RewardSpec { kind, gamma })
    }
}

impl From<Reward> for RewardSpec {
    fn from(kind: Reward) -> Self {
        RewardSpec::new(kind)
    }
}

impl fmt::Display for RewardSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())
    }
}

/// Per-run scoring state: suffix weights of the picked items plus the plan
/// statistics the increased expected weight needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreState {
    /// Picked (expected) weight at tour positions `>= k`, indexed by position.
    suffix_by_position: Vec<f64>,
    count: usize,
    mu_y: f64,
    var_y: f64,
}

impl ScoreState {
    pub fn new(ctx: &TourContext, plan: &PackingPlan) -> Self {
        let mut state = ScoreState {
            suffix_by_position: vec![0.0; ctx.city_count()],
            count: 0,
            mu_y: 0.0,
            var_y: 0.0,
        };
        state.refresh(ctx, plan);
        state
    }

    /// Recomputes the suffix weights after the plan changed.
    pub fn refresh(&mut self, ctx: &TourContext, plan: &PackingPlan) {
        let mut acc = 0.0;
        for (k, &city) in ctx.tour().iter().enumerate().rev() {
            acc += plan.load_at_city(city);
            self.suffix_by_position[k] = acc;
        }
        self.count = plan.count();
        self.mu_y = plan.mu_y();
        self.var_y = plan.var_y();
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mu_y(&self) -> f64 {
        self.mu_y
    }

    pub fn var_y(&self) -> f64 {
        self.var_y
    }

    pub fn suffix_at_position(&self, position: usize) -> f64 {
        self.suffix_by_position[position]
    }
}

/// Picked weight from `city` to the end of the tour.
pub fn suffix_weight(state: &ScoreState, ctx: &TourContext, city: usize) -> f64 {
    state.suffix_at_position(ctx.position(city))
}

/// Extra renting cost of carrying `extra` on top of `base` over distance `d`.
fn marginal_cost(
    d: f64,
    base: f64,
    extra: f64,
    renting_rate: f64,
    v_max: f64,
    nu: f64,
) -> Result<f64> {
    let loaded = travel_speed(v_max, nu, base + extra);
    let unloaded = travel_speed(v_max, nu, base);
    if !(loaded > 0.0) || !(unloaded > 0.0) {
        return Err(Error::Scoring(format!(
            "carrying {} (on top of {base}) gives nonpositive speed {loaded}",
            extra
        )));
    }
    Ok(renting_rate * (d / loaded - d / unloaded))
}

/// `p^gamma / (w^gamma * d)`.
pub fn score_r1(item: &Item, d: f64, gamma: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Scoring(format!(
            "r1 needs a positive remaining distance for item {}, got {d}",
            item.id
        )));
    }
    Ok(item.profit.powf(gamma) / (item.weight.powf(gamma) * d))
}

/// Profit minus the extra renting cost of carrying the item alone from its city to the end.
pub fn score_r2(item: &Item, d: f64, renting_rate: f64, v_max: f64, nu: f64) -> Result<f64> {
    Ok(item.profit - marginal_cost(d, 0.0, item.weight, renting_rate, v_max, nu)?)
}

pub fn score_r3(item: &Item, d: f64, renting_rate: f64, v_max: f64, nu: f64) -> Result<f64> {
    Ok(score_r2(item, d, renting_rate, v_max, nu)? / item.weight)
}

/// Like r2, but on top of the suffix weight `suffix` already carried from the item's city.
pub fn score_r4(
    item: &Item,
    d: f64,
    suffix: f64,
    renting_rate: f64,
    v_max: f64,
    nu: f64,
) -> Result<f64> {
    Ok(item.profit - marginal_cost(d, suffix, item.weight, renting_rate, v_max, nu)?)
}

pub fn score_r5(
    item: &Item,
    d: f64,
    suffix: f64,
    renting_rate: f64,
    v_max: f64,
    nu: f64,
) -> Result<f64> {
    Ok(score_r4(item, d, suffix, renting_rate, v_max, nu)? / item.weight)
}

/// r4 with the item weight replaced by its increased expected weight `w_prime`.
pub fn score_r6(
    item: &Item,
    d: f64,
    suffix: f64,
    w_prime: f64,
    renting_rate: f64,
    v_max: f64,
    nu: f64,
) -> Result<f64> {
    Ok(item.profit - marginal_cost(d, suffix, w_prime, renting_rate, v_max, nu)?)
}

pub fn score_r7(
    item: &Item,
    d: f64,
    suffix: f64,
    w_prime: f64,
    renting_rate: f64,
    v_max: f64,
    nu: f64,
) -> Result<f64> {
    Ok(score_r6(item, d, suffix, w_prime, renting_rate, v_max, nu)? / w_prime)
}

/// Expected weight of the item plus the growth of the surrogate's
/// uncertainty term when the item joins a plan with `count` items and
/// variance `var_y`.
///
/// Hoeffding: `delta * (sqrt(2(k+1) L) - sqrt(2k L))` with `L = ln(1/(1-alpha))`.
/// Chebyshev: `sqrt(alpha/(1-alpha)) * (sqrt(var + sigma^2) - sqrt(var))`.
/// Both reduce to the first-round value for an empty plan.
pub fn increased_expected_weight(
    mu: f64,
    sigma_sq: f64,
    count: usize,
    var_y: f64,
    spec: &StochasticSpec,
) -> f64 {
    let uncertainty = match spec.resolved_bound() {
        Bound::Chebyshev => spec.chebyshev_factor() * ((var_y + sigma_sq).sqrt() - var_y.sqrt()),
        _ => {
            let l = spec.log_term();
            spec.delta * ((2.0 * (count + 1) as f64 * l).sqrt() - (2.0 * count as f64 * l).sqrt())
        }
    };
    mu + uncertainty
}

/// Score of item slot `j` under `reward` given the current state.
pub fn score_item(
    reward: RewardSpec,
    ctx: &TourContext,
    state: &ScoreState,
    mode: &Mode,
    j: usize,
) -> Result<f64> {
    let inst = ctx.instance();
    let item = &inst.items[j];
    let d = ctx.item_suffix_distance(j);
    let (rate, v_max, nu) = (inst.renting_rate, inst.v_max, ctx.nu());
    let suffix = || state.suffix_at_position(ctx.item_position(j));
    match reward.kind {
        Reward::R1 => score_r1(item, d, reward.gamma),
        Reward::R2 => score_r2(item, d, rate, v_max, nu),
        Reward::R3 => score_r3(item, d, rate, v_max, nu),
        Reward::R4 => score_r4(item, d, suffix(), rate, v_max, nu),
        Reward::R5 => score_r5(item, d, suffix(), rate, v_max, nu),
        Reward::R6 | Reward::R7 => {
            let spec = mode.spec().ok_or_else(|| {
                Error::Config(format!("{} requires a chance constraint", reward.kind))
            })?;
            let w_prime = increased_expected_weight(
                spec.mu[j],
                spec.sigma_sq[j],
                state.count,
                state.var_y,
                spec,
            );
            if reward.kind == Reward::R6 {
                score_r6(item, d, suffix(), w_prime, rate, v_max, nu)
            } else {
                score_r7(item, d, suffix(), w_prime, rate, v_max, nu)
            }
        }
    }
}
