//! Command implementations, independent of argument parsing.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use pwt::model::{randomized_tour, Instance};
use pwt::{
    brute_force_optimal, monte_carlo_violation, pack_for_reward, parse_instance, parse_tour,
    run_hh, Bound, HHConfig, Mode, PackOptions, PackingPlan, Reward, RewardSpec, SolveReport,
    StochasticSpec, TourContext, Variant,
};

use crate::error::{CliError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    parse_instance(&read_text(path)?).map_err(|source| CliError::Data {
        path: path.into(),
        source,
    })
}

/// Where the fixed tour comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum TourSource {
    File(PathBuf),
    /// A randomized nearest-neighbour + 2-opt tour built from this seed.
    Seed(u64),
}

impl TourSource {
    pub fn load(&self, instance: &Instance) -> Result<Vec<usize>> {
        match self {
            TourSource::File(path) => {
                parse_tour(&read_text(path)?, instance.city_count()).map_err(|source| {
                    CliError::Data {
                        path: path.clone(),
                        source,
                    }
                })
            }
            TourSource::Seed(seed) => Ok(randomized_tour(instance, *seed)),
        }
    }
}

pub fn load_context(instance: impl Into<Arc<Instance>>, tour: &TourSource) -> Result<TourContext> {
    let instance = instance.into();
    let tour = tour.load(&instance)?;
    Ok(TourContext::new(instance, tour)?)
}

/// Chance-constraint flags as given on the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChanceArgs {
    pub chance: bool,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub bound: Option<Bound>,
}

impl ChanceArgs {
    fn any_parameter(&self) -> bool {
        self.alpha.is_some() || self.delta.is_some() || self.bound.is_some()
    }

    /// Chance mode iff `--chance` is set; the parameters must then be given
    /// and are rejected otherwise.
    pub fn mode(&self, instance: &Instance) -> Result<Mode> {
        if !self.chance {
            if self.any_parameter() {
                return Err(CliError::usage(
                    "--alpha, --delta and --bound require --chance",
                ));
            }
            return Ok(Mode::Deterministic);
        }
        self.chance_mode(instance)
    }

    /// Chance mode iff any parameter (or `--chance`) is given.
    pub fn implied_mode(&self, instance: &Instance) -> Result<Mode> {
        if self.chance || self.any_parameter() {
            self.chance_mode(instance)
        } else {
            Ok(Mode::Deterministic)
        }
    }

    fn chance_mode(&self, instance: &Instance) -> Result<Mode> {
        let (Some(alpha), Some(delta)) = (self.alpha, self.delta) else {
            return Err(CliError::usage(
                "a chance constraint needs both --alpha and --delta",
            ));
        };
        let spec =
            StochasticSpec::uniform(instance, delta, alpha, self.bound.unwrap_or(Bound::Auto))
                .map_err(|e| CliError::usage(e.to_string()))?;
        Ok(Mode::Chance(spec))
    }
}

/// Builds the reward, rejecting `--gamma` for anything but r1.
pub fn reward_spec(kind: Reward, gamma: Option<f64>) -> Result<RewardSpec> {
    match gamma {
        None => Ok(kind.into()),
        Some(g) => RewardSpec::with_gamma(kind, g).map_err(|e| CliError::usage(e.to_string())),
    }
}

/// Checks the reward/constraint pairing: r1-r5 deterministically, r1, r6
/// and r7 under a chance constraint.
pub fn check_pairing(reward: Reward, mode: &Mode) -> Result<()> {
    match (mode.is_chance(), reward) {
        (false, Reward::R6 | Reward::R7) => {
            Err(CliError::usage(format!("{reward} needs --chance")))
        }
        (true, Reward::R2 | Reward::R3 | Reward::R4 | Reward::R5) => Err(CliError::usage(format!(
            "{reward} is not defined under a chance constraint (use r1, r6 or r7)"
        ))),
        _ => Ok(()),
    }
}

/// Runs the greedy algorithm matching `reward`.
pub fn solve(ctx: &TourContext, reward: RewardSpec, mode: &Mode) -> Result<SolveReport> {
    check_pairing(reward.kind, mode)?;
    Ok(pack_for_reward(ctx, reward, mode, PackOptions::default())?.report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HHArgs {
    pub variant: Variant,
    pub iterations: usize,
    pub mutation: f64,
    pub seed: u64,
}

pub fn hyper_heuristic(ctx: &TourContext, args: HHArgs, mode: Mode) -> Result<SolveReport> {
    if args.variant.requires_chance() != mode.is_chance() {
        let need = if args.variant.requires_chance() {
            "needs --alpha and --delta"
        } else {
            "takes no chance-constraint flags"
        };
        return Err(CliError::usage(format!("{} {need}", args.variant)));
    }
    let cfg = HHConfig::new(args.variant, mode, args.seed)
        .with_iterations(args.iterations)
        .with_mutation_rate(args.mutation);
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(run_hh(&cfg, ctx)?.report)
}

/// Exhaustive optimum as a report.
pub fn oracle(ctx: &TourContext, mode: &Mode) -> Result<SolveReport> {
    let started = Instant::now();
    let (plan, z) = brute_force_optimal(ctx, mode)?;
    let evaluations = 1u64 << ctx.item_count();
    Ok(SolveReport::new("oracle", "exhaustive", mode, &plan, z, evaluations).with_runtime(started))
}

/// Result of an empirical chance-constraint check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationReport {
    pub items: Vec<usize>,
    pub rate: f64,
    pub std_error: f64,
    pub samples: u64,
    pub violations: u64,
    /// `(1 - alpha) + 3 * std_error`.
    pub threshold: f64,
    pub pass: bool,
}

impl std::fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "violation rate: {:.6}", self.rate)?;
        writeln!(f, "standard error: {:.6}", self.std_error)?;
        writeln!(
            f,
            "samples: {} (violations: {})",
            self.samples, self.violations
        )?;
        write!(
            f,
            "{} (threshold {:.6})",
            if self.pass { "PASS" } else { "FAIL" },
            self.threshold
        )
    }
}

/// Reads the packed item ids from a plan record (`selected`) or a solve
/// report (`items`).
pub fn read_plan_ids(path: &Path) -> Result<Vec<usize>> {
    let bad = |message: String| CliError::Plan {
        path: path.into(),
        message,
    };
    let value: serde_json::Value =
        serde_json::from_str(&read_text(path)?).map_err(|e| bad(e.to_string()))?;
    let ids = value
        .get("selected")
        .or_else(|| value.get("items"))
        .or(if value.is_array() { Some(&value) } else { None })
        .ok_or_else(|| bad("expected a \"selected\" or \"items\" id list".into()))?;
    serde_json::from_value(ids.clone()).map_err(|e| bad(e.to_string()))
}

pub fn validate_plan(
    instance: &Instance,
    ids: &[usize],
    alpha: f64,
    delta: f64,
    samples: u64,
    seed: u64,
) -> Result<ViolationReport> {
    let spec = StochasticSpec::uniform(instance, delta, alpha, Bound::Auto)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let mode = Mode::Chance(spec.clone());
    let plan = PackingPlan::from_ids(instance, &mode, ids)?;
    let est = monte_carlo_violation(&plan, &spec, instance.capacity, samples, seed)
        .map_err(|e| CliError::usage(e.to_string()))?;
    Ok(ViolationReport {
        items: plan.selected_ids(),
        rate: est.rate,
        std_error: est.std_error,
        samples: est.samples,
        violations: est.violations,
        threshold: (1.0 - alpha) + 3.0 * est.std_error,
        pass: est.within(alpha),
    })
}

/// Tour as one city per line.
pub fn tour_text(tour: &[usize]) -> String {
    let mut out = String::with_capacity(tour.len() * 4);
    for city in tour {
        out.push_str(&city.to_string());
        out.push('\n');
    }
    out
}
