//! Seeded instance generators for tests, benchmarks and tour ensembles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{nn_tour, City, EdgeWeightKind, Instance, Item};

/// Profit/weight correlation classes of the public TTP benchmark suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Correlation {
    /// Profits and weights drawn independently from 1..=1000.
    Uncorrelated,
    /// Weights from 1..=1000, profit = weight + 100.
    BoundedStronglyCorrelated,
    /// Weights from 1000..=1010, profits from 1..=1000.
    UncorrelatedSimilarWeights,
}

impl Correlation {
    pub fn label(self) -> &'static str {
        match self {
            Correlation::Uncorrelated => "uncorrelated",
            Correlation::BoundedStronglyCorrelated => "bounded strongly corr",
            Correlation::UncorrelatedSimilarWeights => "uncorrelated, similar weights",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Correlation::Uncorrelated => "unc",
            Correlation::BoundedStronglyCorrelated => "bsc",
            Correlation::UncorrelatedSimilarWeights => "usw",
        }
    }
}

/// Builds an instance following the TTP benchmark construction.
///
/// Integer coordinates in `[0, 100]`, `items_per_city` items at every city but
/// the first, capacity `floor(class * total_weight / 11)` and speeds in
/// `[0.1, 1]`. The renting rate is set so that a reference solution (greedy
/// profit/weight packing on a nearest-neighbour tour) scores exactly zero,
/// rounded to two decimals.
pub fn benchmark_like(
    cities: usize,
    items_per_city: usize,
    correlation: Correlation,
    capacity_class: u32,
    seed: u64,
) -> Instance {
    assert!(cities >= 2, "need at least two cities");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let city_list: Vec<City> = (1..=cities)
        .map(|index| City {
            index,
            x: rng.gen_range(0..=100) as f64,
            y: rng.gen_range(0..=100) as f64,
        })
        .collect();
    let m = (cities - 1) * items_per_city;
    let items: Vec<Item> = (0..m)
        .map(|j| {
            let (profit, weight) = match correlation {
                Correlation::Uncorrelated => (rng.gen_range(1..=1000), rng.gen_range(1..=1000)),
                Correlation::BoundedStronglyCorrelated => {
                    let w = rng.gen_range(1..=1000);
                    (w + 100, w)
                }
                Correlation::UncorrelatedSimilarWeights => {
                    (rng.gen_range(1..=1000), rng.gen_range(1000..=1010))
                }
            };
            Item {
                id: j + 1,
                profit: profit as f64,
                weight: weight as f64,
                city: 2 + j % (cities - 1),
            }
        })
        .collect();
    let total_weight: f64 = items.iter().map(|it| it.weight).sum();
    let mut inst = Instance {
        name: format!(
            "synth{cities}_n{m}_{}_{capacity_class:02}",
            correlation.short()
        ),
        knapsack_data_type: Some(correlation.label().to_string()),
        cities: city_list,
        items,
        capacity: (capacity_class as f64 * total_weight / 11.0).floor(),
        renting_rate: 0.0,
        v_max: 1.0,
        v_min: 0.1,
        edge_weight_kind: EdgeWeightKind::Ceil2d,
    };
    inst.renting_rate = reference_renting_rate(&inst, seed);
    inst
}

fn reference_renting_rate(inst: &Instance, seed: u64) -> f64 {
    let tour = nn_tour(inst, seed);
    let mut order: Vec<&Item> = inst.items.iter().collect();
    order.sort_by(|a, b| {
        (b.profit / b.weight)
            .total_cmp(&(a.profit / a.weight))
            .then(a.id.cmp(&b.id))
    });
    let mut load = vec![0.0; inst.city_count()];
    let (mut weight, mut profit) = (0.0, 0.0);
    for it in order {
        if weight + it.weight <= inst.capacity {
            weight += it.weight;
            profit += it.profit;
            load[it.city - 1] += it.weight;
        }
    }
    let nu = inst.nu();
    let n = tour.len();
    let mut carried = 0.0;
    let mut time = 0.0;
    for k in 0..n {
        carried += load[tour[k] - 1];
        time += inst.distance(tour[k], tour[(k + 1) % n]) / (inst.v_max - nu * carried);
    }
    if time > 0.0 {
        (profit / time * 100.0).round() / 100.0
    } else {
        1.0
    }
}

/// Size and capacity ranges for [`random_instance`].
#[derive(Debug, Clone)]
pub struct RandomInstanceParams {
    pub cities: std::ops::RangeInclusive<usize>,
    pub items: std::ops::RangeInclusive<usize>,
    /// Capacity as a fraction of the total item weight.
    pub capacity_fraction: std::ops::RangeInclusive<f64>,
    pub edge_weight_kind: EdgeWeightKind,
}

impl Default for RandomInstanceParams {
    fn default() -> Self {
        RandomInstanceParams {
            cities: 4..=12,
            items: 3..=15,
            capacity_fraction: 0.3..=0.8,
            edge_weight_kind: EdgeWeightKind::Euc2d,
        }
    }
}

/// A small random instance: real coordinates in `[0, 100)`, integer profits
/// and weights in `1..=100` placed at random cities (several items may share
/// a city), and a renting rate scaled so travel cost competes with profit.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, params: &RandomInstanceParams) -> Instance {
    let n = rng.gen_range(params.cities.clone());
    let m = rng.gen_range(params.items.clone());
    let cities: Vec<City> = (1..=n)
        .map(|index| City {
            index,
            x: rng.gen_range(0.0..100.0),
            y: rng.gen_range(0.0..100.0),
        })
        .collect();
    let items: Vec<Item> = (0..m)
        .map(|j| Item {
            id: j + 1,
            profit: rng.gen_range(1..=100) as f64,
            weight: rng.gen_range(1..=100) as f64,
            city: rng.gen_range(2..=n),
        })
        .collect();
    let total_weight: f64 = items.iter().map(|it| it.weight).sum();
    let total_profit: f64 = items.iter().map(|it| it.profit).sum();
    let capacity = (rng.gen_range(params.capacity_fraction.clone()) * total_weight).max(1.0);
    let mut inst = Instance {
        name: format!("random{n}_n{m}"),
        knapsack_data_type: None,
        cities,
        items,
        capacity,
        renting_rate: 0.0,
        v_max: 1.0,
        v_min: 0.1,
        edge_weight_kind: params.edge_weight_kind,
    };
    let perimeter = super::tour_length(&inst, &(1..=n).collect::<Vec<_>>()).max(1.0);
    inst.renting_rate = rng.gen_range(0.02..0.4) * total_profit / perimeter;
    inst
}
