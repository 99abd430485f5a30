//! Selection hyper-heuristic over per-acceptance reward schedules.
//!
//! A heuristic sequence assigns a reward function to each acceptance step of
//! Pack_HH. The search is a (1+1) loop: mutate the incumbent sequence, run
//! Pack_HH with it and keep the candidate if its objective is not worse.
//!
//! Randomness comes from one `ChaCha8Rng` stream per run, seeded with the
//! run seed. Each iteration draws, for every position in order, one uniform
//! `f64` deciding whether the position flips, followed by one index draw for
//! the replacement when it does.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TourContext;
use crate::objective::{Mode, PackingPlan};
use crate::pack::{pack_for_reward, pack_sequence_outcome, PackOptions};
use crate::report::SolveReport;
use crate::rewards::{Reward, RewardSpec};

/// One reward per acceptance step; its length equals the item count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HeuristicSequence(Vec<RewardSpec>);

impl HeuristicSequence {
    pub fn constant(reward: RewardSpec, len: usize) -> Self {
        HeuristicSequence(vec![reward; len])
    }

    pub fn from_vec(entries: Vec<RewardSpec>) -> Self {
        HeuristicSequence(entries)
    }

    pub fn names(&self) -> Vec<String> {
        self.0.iter().map(|r| r.kind.name().to_string()).collect()
    }

    pub fn into_inner(self) -> Vec<RewardSpec> {
        self.0
    }
}

impl Deref for HeuristicSequence {
    type Target = [RewardSpec];

    fn deref(&self) -> &[RewardSpec] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    HH1,
    HH2,
    HH3,
    HH4,
    HH5,
    HH6,
}

/// How the first sequence is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Every entry r1.
    ConstantR1,
    /// Every entry the pool member whose own Pack run scores best.
    BestSingle,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::HH1,
        Variant::HH2,
        Variant::HH3,
        Variant::HH4,
        Variant::HH5,
        Variant::HH6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::HH1 => "HH1",
            Variant::HH2 => "HH2",
            Variant::HH3 => "HH3",
            Variant::HH4 => "HH4",
            Variant::HH5 => "HH5",
            Variant::HH6 => "HH6",
        }
    }

    /// Low-level heuristic pool, in listing order.
    pub fn pool(self) -> Vec<RewardSpec> {
        let kinds: &[Reward] = match self {
            Variant::HH1 | Variant::HH2 => &[Reward::R1, Reward::R2, Reward::R3],
            Variant::HH3 | Variant::HH4 => {
                &[Reward::R1, Reward::R2, Reward::R3, Reward::R4, Reward::R5]
            }
            Variant::HH5 | Variant::HH6 => &[Reward::R1, Reward::R6, Reward::R7],
        };
        kinds.iter().copied().map(RewardSpec::new).collect()
    }

    pub fn init(self) -> Init {
        match self {
            Variant::HH1 | Variant::HH3 | Variant::HH5 => Init::ConstantR1,
            Variant::HH2 | Variant::HH4 | Variant::HH6 => Init::BestSingle,
        }
    }

    pub fn requires_chance(self) -> bool {
        matches!(self, Variant::HH5 | Variant::HH6)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown hyper-heuristic variant {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HHConfig {
    pub variant: Variant,
    pub pool: Vec<RewardSpec>,
    pub init: Init,
    /// Outer-loop iterations.
    pub iterations: usize,
    pub mutation_rate: f64,
    pub seed: u64,
    pub mode: Mode,
    /// Optional cap on objective evaluations, checked before each iteration.
    pub max_evaluations: Option<u64>,
    pub options: PackOptions,
}

impl HHConfig {
    pub const DEFAULT_ITERATIONS: usize = 1000;
    pub const DEFAULT_MUTATION_RATE: f64 = 0.1;

    /// Table defaults for `variant`: its pool and initialization, 1000
    /// iterations and mutation rate 0.1.
    pub fn new(variant: Variant, mode: Mode, seed: u64) -> Self {
        HHConfig {
            variant,
            pool: variant.pool(),
            init: variant.init(),
            iterations: Self::DEFAULT_ITERATIONS,
            mutation_rate: Self::DEFAULT_MUTATION_RATE,
            seed,
            mode,
            max_evaluations: None,
            options: PackOptions::default(),
        }
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn with_mutation_rate(mut self, rate: f64) -> Self {
        self.mutation_rate = rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.variant.requires_chance() != self.mode.is_chance() {
            return Err(Error::Config(format!(
                "{} runs under a {} constraint",
                self.variant,
                if self.variant.requires_chance() {
                    "chance"
                } else {
                    "deterministic"
                }
            )));
        }
        if self.pool.is_empty() {
            return Err(Error::Config("empty heuristic pool".into()));
        }
        if !self.mode.is_chance() {
            if let Some(bad) = self.pool.iter().find(|r| r.kind.needs_chance()) {
                return Err(Error::Config(format!(
                    "{} needs a chance constraint",
                    bad.kind
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::Config(format!(
                "mutation rate must lie in [0, 1], got {}",
                self.mutation_rate
            )));
        }
        Ok(())
    }
}

struct Initialization {
    sequence: HeuristicSequence,
    /// Best single-heuristic Pack result, for `BestSingle`.
    best_single: Option<(PackingPlan, f64)>,
    evaluations: u64,
}

fn initialize(cfg: &HHConfig, ctx: &TourContext) -> Result<Initialization> {
    let m = ctx.item_count();
    match cfg.init {
        Init::ConstantR1 => Ok(Initialization {
            sequence: HeuristicSequence::constant(RewardSpec::new(Reward::R1), m),
            best_single: None,
            evaluations: 0,
        }),
        Init::BestSingle => {
            let mut best: Option<(RewardSpec, PackingPlan, f64)> = None;
            let mut evaluations = 0;
            for &reward in &cfg.pool {
                let res = pack_for_reward(ctx, reward, &cfg.mode, cfg.options)?;
                evaluations += res.report.evaluations;
                let z = res.report.objective;
                // Strictly better only, so ties keep the earlier pool member.
                if best.as_ref().is_none_or(|(_, _, bz)| z > *bz) {
                    best = Some((reward, res.plan, z));
                }
            }
            let (reward, plan, z) = best.expect("pool is nonempty");
            Ok(Initialization {
                sequence: HeuristicSequence::constant(reward, m),
                best_single: Some((plan, z)),
                evaluations,
            })
        }
    }
}

/// Initial heuristic sequence for `cfg`.
pub fn init_sequence(cfg: &HHConfig, ctx: &TourContext) -> Result<HeuristicSequence> {
    cfg.validate()?;
    Ok(initialize(cfg, ctx)?.sequence)
}

/// Independently per position, with probability `omega`, replaces the entry
/// by a uniformly drawn different member of `pool`.
pub fn mutate<R: Rng + ?Sized>(
    sequence: &HeuristicSequence,
    omega: f64,
    pool: &[RewardSpec],
    rng: &mut R,
) -> HeuristicSequence {
    let entries = sequence
        .iter()
        .map(|&current| {
            if rng.gen::<f64>() >= omega || pool.len() < 2 {
                return current;
            }
            match pool.iter().position(|&p| p == current) {
                Some(at) => {
                    let k = rng.gen_range(0..pool.len() - 1);
                    pool[if k >= at { k + 1 } else { k }]
                }
                None => pool[rng.gen_range(0..pool.len())],
            }
        })
        .collect();
    HeuristicSequence(entries)
}

#[derive(Debug, Clone)]
pub struct HHResult {
    pub plan: PackingPlan,
    pub sequence: HeuristicSequence,
    pub report: SolveReport,
}

/// Runs the hyper-heuristic.
///
/// The incumbent starts as Pack_HH on the initial sequence; with best-single
/// initialization, the best single-heuristic plan replaces it when that plan
/// scores higher. Each iteration then mutates the sequence and adopts the
/// candidate when its objective is at least the incumbent's.
pub fn run_hh(cfg: &HHConfig, ctx: &TourContext) -> Result<HHResult> {
    cfg.validate()?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let init = initialize(cfg, ctx)?;
    let mut evaluations = init.evaluations;
    let mut sequence = init.sequence;
    let first = pack_sequence_outcome(ctx, &sequence, &cfg.mode, cfg.options)?;
    evaluations += first.evaluations;
    let (mut plan, mut z) = (first.plan, first.objective);
    if let Some((single_plan, single_z)) = init.best_single {
        if single_z > z {
            plan = single_plan;
            z = single_z;
        }
    }

    let mut trajectory = Vec::with_capacity(cfg.iterations + 1);
    trajectory.push(z);
    for _ in 0..cfg.iterations {
        if cfg.max_evaluations.is_some_and(|cap| evaluations >= cap) {
            break;
        }
        let candidate = mutate(&sequence, cfg.mutation_rate, &cfg.pool, &mut rng);
        let outcome = pack_sequence_outcome(ctx, &candidate, &cfg.mode, cfg.options)?;
        evaluations += outcome.evaluations;
        if outcome.objective >= z {
            sequence = candidate;
            plan = outcome.plan;
            z = outcome.objective;
        }
        trajectory.push(z);
    }

    let mut report = SolveReport::new("hh", cfg.variant.name(), &cfg.mode, &plan, z, evaluations)
        .with_runtime(started);
    report.seed = Some(cfg.seed);
    report.sequence = Some(sequence.names());
    report.trajectory = Some(trajectory);
    Ok(HHResult {
        plan,
        sequence,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::toy4;
    use crate::objective::{Bound, StochasticSpec};

    fn ctx() -> TourContext {
        TourContext::new(toy4(), vec![1, 2, 3, 4]).unwrap()
    }

    #[test]
    fn initial_sequences() {
        let ctx = ctx();
        let hh1 = HHConfig::new(Variant::HH1, Mode::Deterministic, 0);
        assert_eq!(
            init_sequence(&hh1, &ctx).unwrap(),
            HeuristicSequence::constant(Reward::R1.into(), 3)
        );
        // r2 and r3 both reach 64; r2 is listed first.
        let hh2 = HHConfig::new(Variant::HH2, Mode::Deterministic, 0);
        assert_eq!(
            init_sequence(&hh2, &ctx).unwrap(),
            HeuristicSequence::constant(Reward::R2.into(), 3)
        );
        let hh4 = HHConfig::new(Variant::HH4, Mode::Deterministic, 0);
        assert_eq!(
            init_sequence(&hh4, &ctx).unwrap(),
            HeuristicSequence::constant(Reward::R2.into(), 3)
        );
    }

    #[test]
    fn mutation_edge_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pool = vec![RewardSpec::new(Reward::R1), RewardSpec::new(Reward::R3)];
        let seq = HeuristicSequence::constant(pool[0], 50);
        assert_eq!(mutate(&seq, 0.0, &pool, &mut rng), seq);
        let flipped = mutate(&seq, 1.0, &pool, &mut rng);
        assert!(flipped.iter().all(|&r| r == pool[1]));
        assert_eq!(seq, HeuristicSequence::constant(pool[0], 50));

        let pool5 = Variant::HH4.pool();
        let seq = HeuristicSequence::constant(pool5[2], 200);
        let all = mutate(&seq, 1.0, &pool5, &mut rng);
        assert!(all.iter().all(|r| *r != pool5[2] && pool5.contains(r)));
    }

    #[test]
    fn variant_requirements() {
        let ctx = ctx();
        let cfg = HHConfig::new(Variant::HH5, Mode::Deterministic, 0);
        assert!(run_hh(&cfg, &ctx).is_err());
        let chance =
            Mode::Chance(StochasticSpec::uniform(ctx.instance(), 2.0, 0.9, Bound::Auto).unwrap());
        let cfg = HHConfig::new(Variant::HH2, chance, 0);
        assert!(run_hh(&cfg, &ctx).is_err());
        assert_eq!("hh4".parse::<Variant>().unwrap(), Variant::HH4);
    }

    #[test]
    fn zero_iterations_returns_initialization() {
        let ctx = ctx();
        let cfg = HHConfig::new(Variant::HH2, Mode::Deterministic, 3).with_iterations(0);
        let res = run_hh(&cfg, &ctx).unwrap();
        assert_eq!(res.report.objective, 64.0);
        assert_eq!(res.report.trajectory.as_deref(), Some(&[64.0][..]));
    }

    #[test]
    fn hh2_keeps_optimum() {
        let ctx = ctx();
        for seed in 0..5 {
            let cfg = HHConfig::new(Variant::HH2, Mode::Deterministic, seed).with_iterations(100);
            let res = run_hh(&cfg, &ctx).unwrap();
            assert_eq!(res.report.objective, 64.0);
            assert_eq!(res.report.trajectory.as_ref().unwrap().len(), 101);
        }
    }

    #[test]
    fn evaluation_cap_stops_early() {
        let ctx = ctx();
        let mut cfg = HHConfig::new(Variant::HH1, Mode::Deterministic, 3);
        cfg.max_evaluations = Some(1);
        let res = run_hh(&cfg, &ctx).unwrap();
        assert_eq!(res.report.trajectory.unwrap().len(), 1);
    }
}
