//! Greedy solvers for the packing while travelling problem: a fixed tour is
//! given and the items to pick up along it are chosen so as to maximize
//! profit minus a renting cost on the travel time, where carried weight slows
//! the vehicle down.
//!
//! The crate provides the objective and capacity checks ([`objective`]), the
//! reward functions r1-r7 ([`rewards`]), the greedy packers ([`pack`]), a
//! selection hyper-heuristic over reward schedules ([`hyper`]) and exact or
//! sampling-based verification ([`validate`]). Chance constraints on uniform
//! stochastic weights are handled through Hoeffding and Chebyshev surrogate
//! weights.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hyper;
pub mod model;
pub mod objective;
pub mod pack;
pub mod report;
pub mod rewards;
pub mod validate;

pub use error::{Error, Result};
pub use hyper::{
    init_sequence, mutate, run_hh, HHConfig, HHResult, HeuristicSequence, Init, Variant,
};
pub use model::{parse_instance, parse_tour, Instance, Item, TourContext};
pub use objective::{
    evaluate, evaluate_delta, Bound, Mode, PackingPlan, PlanRecord, StochasticSpec,
};
pub use pack::{
    pack_for_reward, pack_iterative, pack_sequence, pack_static, pack_surrogate, PackOptions,
    PackResult, SortOrder,
};
pub use report::SolveReport;
pub use rewards::{Reward, RewardSpec};
pub use validate::{brute_force_optimal, monte_carlo_violation, MonteCarloEstimate};
