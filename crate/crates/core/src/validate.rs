//! Verification oracles: exhaustive search over all packings of small
//! instances and Monte Carlo estimation of chance-constraint violation.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TourContext;
use crate::objective::{travel_speed, Mode, PackingPlan, StochasticSpec};

/// Largest item count [`brute_force_optimal`] accepts.
pub const BRUTE_FORCE_CAP: usize = 24;

#[derive(Clone, Copy)]
struct Candidate {
    mask: u32,
    z: f64,
}

/// Lexicographic order of the ascending id lists encoded by two masks
/// (bit j stands for id j + 1).
fn lex_ids(mut a: u32, mut b: u32) -> Ordering {
    loop {
        match (a == 0, b == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (la, lb) = (a.trailing_zeros(), b.trailing_zeros());
        if la != lb {
            return la.cmp(&lb);
        }
        a &= a - 1;
        b &= b - 1;
    }
}

/// Preference: higher objective, then fewer items, then smaller id set.
fn better(a: &Candidate, b: &Candidate) -> bool {
    match a.z.total_cmp(&b.z) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => match a.mask.count_ones().cmp(&b.mask.count_ones()) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => lex_ids(a.mask, b.mask) == Ordering::Less,
        },
    }
}

/// Best feasible plan by enumerating all `2^m` subsets.
///
/// Subsets violating the mode's constraint, or whose evaluation hits a
/// nonpositive speed, are discarded. Ties prefer fewer items, then the
/// lexicographically smallest id set.
pub fn brute_force_optimal(ctx: &TourContext, mode: &Mode) -> Result<(PackingPlan, f64)> {
    let inst = ctx.instance();
    let m = inst.item_count();
    if m > BRUTE_FORCE_CAP {
        return Err(Error::TooManyItems {
            items: m,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let n = ctx.city_count();
    let nu = ctx.nu();
    let spec = mode.spec();
    let weights: Vec<f64> = inst.items.iter().map(|it| it.weight).collect();
    let positions: Vec<usize> = (0..m).map(|j| ctx.item_position(j)).collect();

    let eval_mask = |mask: u32, load: &mut Vec<f64>| -> Option<f64> {
        let mut weight = 0.0;
        let mut profit = 0.0;
        let mut var = 0.0;
        let mut count = 0;
        load.iter_mut().for_each(|l| *l = 0.0);
        for j in 0..m {
            if mask >> j & 1 == 1 {
                weight += weights[j];
                profit += inst.items[j].profit;
                load[positions[j]] += weights[j];
                count += 1;
                if let Some(s) = spec {
                    var += s.sigma_sq[j];
                }
            }
        }
        let constrained = match spec {
            None => weight,
            Some(s) => s.surrogate(weight, count, var),
        };
        if constrained > inst.capacity {
            return None;
        }
        let mut carried = 0.0;
        let mut time = 0.0;
        for (k, &leg) in ctx.legs().iter().enumerate() {
            carried += load[k];
            let speed = travel_speed(inst.v_max, nu, carried);
            if !(speed > 0.0) {
                return None;
            }
            time += leg / speed;
        }
        Some(profit - inst.renting_rate * time)
    };

    let total: u64 = 1u64 << m;
    let chunk = 1u64 << 12;
    let best = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut load = vec![0.0; n];
            let mut best: Option<Candidate> = None;
            for mask in (c * chunk)..((c + 1) * chunk).min(total) {
                let mask = mask as u32;
                if let Some(z) = eval_mask(mask, &mut load) {
                    let cand = Candidate { mask, z };
                    if best.as_ref().is_none_or(|b| better(&cand, b)) {
                        best = Some(cand);
                    }
                }
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(a), Some(b)) => Some(if better(&b, &a) { b } else { a }),
                (a, None) => a,
                (None, b) => b,
            },
        );
    // The empty plan is always feasible and always has a positive speed.
    let best = best.ok_or_else(|| Error::Validation("no feasible subset".into()))?;
    let plan = PackingPlan::from_slots(inst, mode, (0..m).filter(|j| best.mask >> j & 1 == 1));
    Ok((plan, best.z))
}

/// Empirical violation rate of a chance constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub rate: f64,
    /// Binomial standard error `sqrt(rate (1 - rate) / samples)`.
    pub std_error: f64,
    pub samples: u64,
    pub violations: u64,
}

impl MonteCarloEstimate {
    /// Whether the rate stays within `(1 - alpha) + 3 * std_error`.
    pub fn within(&self, alpha: f64) -> bool {
        self.rate <= (1.0 - alpha) + 3.0 * self.std_error
    }
}

const SAMPLES_PER_STREAM: u64 = 4096;

/// Samples independent uniform weights on `[mu_j - delta, mu_j + delta]` for
/// the selected items and counts how often their total exceeds `capacity`.
///
/// Sample `i` is drawn from ChaCha8 stream `i / 4096` of `seed`, so the
/// estimate does not depend on the number of worker threads.
pub fn monte_carlo_violation(
    plan: &PackingPlan,
    spec: &StochasticSpec,
    capacity: f64,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples == 0 {
        return Err(Error::Config("at least one sample is required".into()));
    }
    let means: Vec<f64> = plan
        .selected()
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(j, _)| spec.mu[j])
        .collect();
    let delta = spec.delta;
    let streams = samples.div_ceil(SAMPLES_PER_STREAM);
    let violations: u64 = (0..streams)
        .into_par_iter()
        .map(|stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let start = stream * SAMPLES_PER_STREAM;
            let end = (start + SAMPLES_PER_STREAM).min(samples);
            (start..end)
                .filter(|_| {
                    let total: f64 = means
                        .iter()
                        .map(|&mu| mu + delta * (2.0 * rng.gen::<f64>() - 1.0))
                        .sum();
                    total > capacity
                })
                .count() as u64
        })
        .sum();
    let rate = violations as f64 / samples as f64;
    Ok(MonteCarloEstimate {
        rate,
        std_error: (rate * (1.0 - rate) / samples as f64).sqrt(),
        samples,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::toy4;
    use crate::objective::{evaluate, is_feasible, surrogate_weight_chebyshev, Bound};

    fn ctx() -> TourContext {
        TourContext::new(toy4(), vec![1, 2, 3, 4]).unwrap()
    }

    #[test]
    fn lexicographic_masks() {
        // {1,2} < {1,3} < {2} ; {1} < {1,2}
        assert_eq!(lex_ids(0b011, 0b101), Ordering::Less);
        assert_eq!(lex_ids(0b101, 0b010), Ordering::Less);
        assert_eq!(lex_ids(0b001, 0b011), Ordering::Less);
        assert_eq!(lex_ids(0b011, 0b001), Ordering::Greater);
        assert_eq!(lex_ids(0b010, 0b101), Ordering::Greater);
        assert_eq!(lex_ids(0b110, 0b110), Ordering::Equal);
    }

    #[test]
    fn lexicographic_matches_vectors() {
        let ids = |m: u32| (0..8).filter(|j| m >> j & 1 == 1).collect::<Vec<u32>>();
        for a in 0..256u32 {
            for b in 0..256u32 {
                assert_eq!(lex_ids(a, b), ids(a).cmp(&ids(b)), "{a:b} vs {b:b}");
            }
        }
    }

    #[test]
    fn toy4_optimum() {
        let (plan, z) = brute_force_optimal(&ctx(), &Mode::Deterministic).unwrap();
        assert_eq!(plan.selected_ids(), vec![1, 3]);
        assert!((z - 64.0).abs() < 1e-12);
    }

    #[test]
    fn zero_capacity_packs_nothing() {
        let mut inst = toy4();
        inst.capacity = 0.0;
        let ctx = TourContext::new(inst, vec![1, 2, 3, 4]).unwrap();
        let (plan, z) = brute_force_optimal(&ctx, &Mode::Deterministic).unwrap();
        assert_eq!(plan.count(), 0);
        assert_eq!(z, -4.0);
    }

    #[test]
    fn chance_optimum_by_enumeration() {
        let ctx = ctx();
        let spec = StochasticSpec::uniform(ctx.instance(), 2.0, 0.9, Bound::Chebyshev).unwrap();
        let mode = Mode::Chance(spec.clone());
        let (plan, z) = brute_force_optimal(&ctx, &mode).unwrap();
        // Independent enumeration with the Chebyshev filter.
        let mut best = (f64::NEG_INFINITY, vec![]);
        for mask in 0..8u32 {
            let ids: Vec<usize> = (0..3)
                .filter(|j| mask >> j & 1 == 1)
                .map(|j| j + 1)
                .collect();
            let p = PackingPlan::from_ids(ctx.instance(), &mode, &ids).unwrap();
            if surrogate_weight_chebyshev(&p, &spec) > 15.0 {
                continue;
            }
            let zz = evaluate(&ctx, &p).unwrap();
            if zz > best.0 {
                best = (zz, ids);
            }
        }
        assert_eq!(plan.selected_ids(), best.1);
        assert_eq!(z, best.0);
        assert!(is_feasible(&plan, &ctx, &mode));
        // {e1, e3} breaks the surrogate capacity; {e2, e3} has 10 + 3 sqrt(8/3) = 14.9.
        assert_eq!(best.1, vec![2, 3]);
    }

    #[test]
    fn refuses_large_instances() {
        let mut inst = toy4();
        inst.items = (0..25)
            .map(|j| crate::model::Item {
                id: j + 1,
                profit: 1.0,
                weight: 1.0,
                city: 2,
            })
            .collect();
        let ctx = TourContext::new(inst, vec![1, 2, 3, 4]).unwrap();
        assert_eq!(
            brute_force_optimal(&ctx, &Mode::Deterministic).unwrap_err(),
            Error::TooManyItems { items: 25, cap: 24 }
        );
    }

    fn one_item_spec(mu: f64, delta: f64) -> (PackingPlan, StochasticSpec) {
        let mut inst = toy4();
        inst.items.truncate(1);
        inst.items[0].weight = mu;
        let spec = StochasticSpec::uniform(&inst, delta, 0.9, Bound::Auto).unwrap();
        let plan = PackingPlan::from_ids(&inst, &Mode::Chance(spec.clone()), &[1]).unwrap();
        (plan, spec)
    }

    #[test]
    fn monte_carlo_support_edges() {
        let (plan, spec) = one_item_spec(10.0, 2.0);
        let est = monte_carlo_violation(&plan, &spec, 12.0, 5000, 1).unwrap();
        assert_eq!(est.rate, 0.0);
        let est = monte_carlo_violation(&plan, &spec, 7.9, 5000, 1).unwrap();
        assert_eq!(est.rate, 1.0);
        assert!(monte_carlo_violation(&plan, &spec, 7.9, 0, 1).is_err());
    }

    #[test]
    fn monte_carlo_uniform_tail() {
        let (plan, spec) = one_item_spec(10.0, 2.0);
        let est = monte_carlo_violation(&plan, &spec, 11.0, 100_000, 42).unwrap();
        assert!((est.rate - 0.25).abs() <= 3.0 * est.std_error, "{est:?}");
        let again = monte_carlo_violation(&plan, &spec, 11.0, 100_000, 42).unwrap();
        assert_eq!(est, again);
    }
}
