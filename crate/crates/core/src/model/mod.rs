//! Instances, tours and the fixed-tour solve context.

mod context;
pub mod generate;
mod instance;
mod tour;

pub use context::TourContext;
pub use instance::{parse_instance, City, EdgeWeightKind, Instance, Item};
pub use tour::{
    nn_tour, parse_tour, randomized_tour, rotate_to_first_city, tour_length, two_opt, validate_tour,
};

/// Four cities on the unit square with three items; every objective and
/// reward value on it can be worked out by hand.
///
/// Cities 1-4 sit at (0,0), (1,0), (1,1), (0,1). Items: e1 = (p 50, w 10,
/// city 2), e2 = (p 20, w 5, city 3), e3 = (p 30, w 5, city 4). B = 15,
/// R = 1, speeds in [0.1, 1.0], EUC_2D. Use it with the tour `[1, 2, 3, 4]`.
pub fn toy4() -> Instance {
    let coords = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
    Instance {
        name: "TOY4".to_string(),
        knapsack_data_type: None,
        cities: coords
            .iter()
            .enumerate()
            .map(|(k, &(x, y))| City { index: k + 1, x, y })
            .collect(),
        items: vec![
            Item {
                id: 1,
                profit: 50.0,
                weight: 10.0,
                city: 2,
            },
            Item {
                id: 2,
                profit: 20.0,
                weight: 5.0,
                city: 3,
            },
            Item {
                id: 3,
                profit: 30.0,
                weight: 5.0,
                city: 4,
            },
        ],
        capacity: 15.0,
        renting_rate: 1.0,
        v_max: 1.0,
        v_min: 0.1,
        edge_weight_kind: EdgeWeightKind::Euc2d,
    }
}
