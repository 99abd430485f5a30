use std::sync::Arc;

use super::tour::{rotate_to_first_city, validate_tour};
use super::Instance;
use crate::error::Result;

/// A fixed tour over an instance with the per-city quantities every solver needs.
///
/// Immutable after construction; clones share the instance.
#[derive(Debug, Clone)]
pub struct TourContext {
    instance: Arc<Instance>,
    tour: Vec<usize>,
    /// 0-based tour position of each city, indexed by `city - 1`.
    position: Vec<usize>,
    /// Remaining distance from each city back to city 1, indexed by `city - 1`.
    suffix_distance: Vec<f64>,
    /// `legs[k]` is the distance from `tour[k]` to the next city (wrapping to city 1).
    legs: Vec<f64>,
    /// 0-based tour position of each item's city, indexed by item slot.
    item_position: Vec<usize>,
    total_distance: f64,
    nu: f64,
}

impl TourContext {
    /// Builds the context with a single backward pass over the tour.
    ///
    /// The tour must be a permutation of the instance's cities; it is rotated to
    /// start at city 1 if needed.
    pub fn new(instance: impl Into<Arc<Instance>>, tour: Vec<usize>) -> Result<Self> {
        let instance = instance.into();
        let n = instance.city_count();
        validate_tour(&tour, n)?;
        let tour = rotate_to_first_city(tour);

        let mut position = vec![0; n];
        for (k, &city) in tour.iter().enumerate() {
            position[city - 1] = k;
        }
        let legs: Vec<f64> = (0..n)
            .map(|k| instance.distance(tour[k], tour[(k + 1) % n]))
            .collect();
        let mut suffix_distance = vec![0.0; n];
        let mut acc = 0.0;
        for k in (0..n).rev() {
            acc += legs[k];
            suffix_distance[tour[k] - 1] = acc;
        }
        let item_position = instance
            .items
            .iter()
            .map(|it| position[it.city - 1])
            .collect();
        let nu = instance.nu();
        Ok(TourContext {
            total_distance: acc,
            instance,
            tour,
            position,
            suffix_distance,
            legs,
            item_position,
            nu,
        })
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn shared_instance(&self) -> Arc<Instance> {
        Arc::clone(&self.instance)
    }

    pub fn tour(&self) -> &[usize] {
        &self.tour
    }

    pub fn city_count(&self) -> usize {
        self.tour.len()
    }

    pub fn item_count(&self) -> usize {
        self.instance.items.len()
    }

    /// 0-based tour position of a 1-based city.
    pub fn position(&self, city: usize) -> usize {
        self.position[city - 1]
    }

    /// Tour position of the city holding the item in slot `item`.
    pub fn item_position(&self, item: usize) -> usize {
        self.item_position[item]
    }

    /// Distance from `city` along the rest of the tour back to city 1.
    pub fn suffix_distance(&self, city: usize) -> f64 {
        self.suffix_distance[city - 1]
    }

    /// Suffix distance of the city holding the item in slot `item`.
    pub fn item_suffix_distance(&self, item: usize) -> f64 {
        self.suffix_distance[self.instance.items[item].city - 1]
    }

    pub fn legs(&self) -> &[f64] {
        &self.legs
    }

    pub fn total_distance(&self) -> f64 {
        self.total_distance
    }

    /// `(v_max - v_min) / B`.
    pub fn nu(&self) -> f64 {
        self.nu
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::toy4;

    #[test]
    fn toy4_suffix_distances() {
        let ctx = TourContext::new(toy4(), vec![1, 2, 3, 4]).unwrap();
        let d: Vec<f64> = (1..=4).map(|c| ctx.suffix_distance(c)).collect();
        assert_eq!(d, vec![4.0, 3.0, 2.0, 1.0]);
        assert_eq!(ctx.total_distance(), 4.0);
        assert!((ctx.nu() - 0.06).abs() < 1e-15);
        assert_eq!(ctx.item_position(2), 3);
    }

    #[test]
    fn rotates_and_telescopes() {
        let ctx = TourContext::new(toy4(), vec![3, 4, 1, 2]).unwrap();
        assert_eq!(ctx.tour(), &[1, 2, 3, 4]);
        let tour = ctx.tour().to_vec();
        for k in 0..tour.len() - 1 {
            let diff = ctx.suffix_distance(tour[k]) - ctx.suffix_distance(tour[k + 1]);
            assert!((diff - ctx.instance().distance(tour[k], tour[k + 1])).abs() < 1e-12);
        }
        assert_eq!(ctx.suffix_distance(1), ctx.total_distance());
    }
}
