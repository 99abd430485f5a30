//! The packing objective, the capacity constraint and the chance-constraint
//! surrogate weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, TourContext};

/// Tail bound used to turn the chance constraint into a deterministic one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Hoeffding,
    Chebyshev,
    /// Chebyshev for `alpha < 0.95`, Hoeffding otherwise.
    Auto,
}

impl Bound {
    /// Confidence level at which `Auto` switches from Chebyshev to Hoeffding.
    pub const AUTO_THRESHOLD: f64 = 0.95;

    pub fn resolve(self, alpha: f64) -> Bound {
        match self {
            Bound::Auto if alpha < Self::AUTO_THRESHOLD => Bound::Chebyshev,
            Bound::Auto => Bound::Hoeffding,
            b => b,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Bound::Hoeffding => "hoeffding",
            Bound::Chebyshev => "chebyshev",
            Bound::Auto => "auto",
        }
    }
}

impl std::str::FromStr for Bound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hoeffding" | "hoe" => Ok(Bound::Hoeffding),
            "chebyshev" | "cheb" => Ok(Bound::Chebyshev),
            "auto" => Ok(Bound::Auto),
            _ => Err(Error::Config(format!("unknown bound {s:?}"))),
        }
    }
}

/// Independent uniform item weights on `[mu_j - delta, mu_j + delta]` and the
/// confidence level the capacity must hold with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticSpec {
    pub delta: f64,
    pub alpha: f64,
    /// Expected weights; equal to the instance's nominal weights.
    pub mu: Vec<f64>,
    /// Per-item variances, `delta^2 / 3` for every item.
    pub sigma_sq: Vec<f64>,
    pub bound: Bound,
}

impl StochasticSpec {
    pub fn uniform(instance: &Instance, delta: f64, alpha: f64, bound: Bound) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::Config(format!(
                "delta must be finite and nonnegative, got {delta}"
            )));
        }
        let m = instance.item_count();
        Ok(StochasticSpec {
            delta,
            alpha,
            mu: instance.items.iter().map(|it| it.weight).collect(),
            sigma_sq: vec![delta * delta / 3.0; m],
            bound,
        })
    }

    /// The bound actually applied (`Auto` resolved against `alpha`).
    pub fn resolved_bound(&self) -> Bound {
        self.bound.resolve(self.alpha)
    }

    /// `ln(1 / (1 - alpha))`.
    pub fn log_term(&self) -> f64 {
        -(1.0 - self.alpha).ln()
    }

    /// `sqrt(alpha / (1 - alpha))`.
    pub fn chebyshev_factor(&self) -> f64 {
        (self.alpha / (1.0 - self.alpha)).sqrt()
    }

    /// Surrogate weight of a plan with the given aggregates under the resolved bound.
    pub fn surrogate(&self, mu_y: f64, count: usize, var_y: f64) -> f64 {
        match self.resolved_bound() {
            Bound::Chebyshev => chebyshev_surrogate(mu_y, var_y, self.alpha),
            _ => hoeffding_surrogate(mu_y, count, self.delta, self.alpha),
        }
    }
}

/// `mu + delta * sqrt(2 * count * ln(1 / (1 - alpha)))`.
pub fn hoeffding_surrogate(mu_y: f64, count: usize, delta: f64, alpha: f64) -> f64 {
    mu_y + delta * (2.0 * count as f64 * -(1.0 - alpha).ln()).sqrt()
}

/// `mu + sqrt(alpha / (1 - alpha)) * sqrt(var)`.
pub fn chebyshev_surrogate(mu_y: f64, var_y: f64, alpha: f64) -> f64 {
    mu_y + (alpha / (1.0 - alpha)).sqrt() * var_y.sqrt()
}

/// Which capacity constraint a run is subject to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    /// `total weight <= B`.
    Deterministic,
    /// `P(total weight <= B) >= alpha`, enforced through a surrogate weight.
    Chance(StochasticSpec),
}

impl Mode {
    pub fn spec(&self) -> Option<&StochasticSpec> {
        match self {
            Mode::Deterministic => None,
            Mode::Chance(spec) => Some(spec),
        }
    }

    pub fn is_chance(&self) -> bool {
        matches!(self, Mode::Chance(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Deterministic => "deterministic",
            Mode::Chance(_) => "chance",
        }
    }

    fn item_mu(&self, instance: &Instance, j: usize) -> f64 {
        match self {
            Mode::Deterministic => instance.items[j].weight,
            Mode::Chance(spec) => spec.mu[j],
        }
    }

    fn item_variance(&self, j: usize) -> f64 {
        match self {
            Mode::Deterministic => 0.0,
            Mode::Chance(spec) => spec.sigma_sq[j],
        }
    }
}

/// A binary selection over the items with cached aggregates.
///
/// The aggregates are maintained incrementally by [`PackingPlan::add`] and
/// [`PackingPlan::remove`]; both need the instance and mode the plan belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingPlan {
    selected: Vec<bool>,
    total_weight: f64,
    total_profit: f64,
    mu_y: f64,
    var_y: f64,
    count: usize,
    /// Expected weight picked up at each city, indexed by `city - 1`.
    load_by_city: Vec<f64>,
}

impl PackingPlan {
    pub fn empty(instance: &Instance) -> Self {
        PackingPlan {
            selected: vec![false; instance.item_count()],
            total_weight: 0.0,
            total_profit: 0.0,
            mu_y: 0.0,
            var_y: 0.0,
            count: 0,
            load_by_city: vec![0.0; instance.city_count()],
        }
    }

    /// Plan selecting the given item slots (0-based).
    pub fn from_slots(
        instance: &Instance,
        mode: &Mode,
        slots: impl IntoIterator<Item = usize>,
    ) -> Self {
        let mut plan = Self::empty(instance);
        for j in slots {
            if !plan.selected[j] {
                plan.add(instance, mode, j);
            }
        }
        plan
    }

    /// Plan selecting the given 1-based item ids.
    pub fn from_ids(instance: &Instance, mode: &Mode, ids: &[usize]) -> Result<Self> {
        let m = instance.item_count();
        if let Some(&bad) = ids.iter().find(|&&id| id == 0 || id > m) {
            return Err(Error::Validation(format!(
                "plan references unknown item id {bad} (instance has {m} items)"
            )));
        }
        Ok(Self::from_slots(
            instance,
            mode,
            ids.iter().map(|id| id - 1),
        ))
    }

    pub fn add(&mut self, instance: &Instance, mode: &Mode, j: usize) {
        debug_assert!(!self.selected[j], "item slot {j} already selected");
        let item = &instance.items[j];
        let mu = mode.item_mu(instance, j);
        self.selected[j] = true;
        self.total_weight += item.weight;
        self.total_profit += item.profit;
        self.mu_y += mu;
        self.var_y += mode.item_variance(j);
        self.count += 1;
        self.load_by_city[item.city - 1] += mu;
    }

    pub fn remove(&mut self, instance: &Instance, mode: &Mode, j: usize) {
        debug_assert!(self.selected[j], "item slot {j} not selected");
        let item = &instance.items[j];
        let mu = mode.item_mu(instance, j);
        self.selected[j] = false;
        self.total_weight -= item.weight;
        self.total_profit -= item.profit;
        self.mu_y -= mu;
        self.var_y -= mode.item_variance(j);
        self.count -= 1;
        self.load_by_city[item.city - 1] -= mu;
    }

    pub fn is_selected(&self, j: usize) -> bool {
        self.selected[j]
    }

    pub fn selected(&self) -> &[bool] {
        &self.selected
    }

    /// Selected 1-based item ids in ascending order.
    pub fn selected_ids(&self) -> Vec<usize> {
        self.selected
            .iter()
            .enumerate()
            .filter_map(|(j, &s)| s.then_some(j + 1))
            .collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn total_profit(&self) -> f64 {
        self.total_profit
    }

    pub fn mu_y(&self) -> f64 {
        self.mu_y
    }

    pub fn var_y(&self) -> f64 {
        self.var_y
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn load_at_city(&self, city: usize) -> f64 {
        self.load_by_city[city - 1]
    }

    /// Serializable summary of the plan.
    pub fn record(&self, objective: f64, surrogate_weight: Option<f64>) -> PlanRecord {
        PlanRecord {
            selected: self.selected_ids(),
            objective,
            weight: self.total_weight,
            surrogate_weight,
        }
    }
}

/// JSON form of a packing plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    /// 1-based item ids.
    pub selected: Vec<usize>,
    pub objective: f64,
    pub weight: f64,
    pub surrogate_weight: Option<f64>,
}

/// Travel speed while carrying `weight`. An empty vehicle always moves at
/// `v_max`, which keeps zero-capacity instances (infinite `nu`) well defined.
#[inline]
pub(crate) fn travel_speed(v_max: f64, nu: f64, weight: f64) -> f64 {
    if weight == 0.0 {
        v_max
    } else {
        v_max - nu * weight
    }
}

/// Objective value: total profit minus the renting rate times the total
/// travel time, where the weight carried on each leg is everything picked up
/// so far along the tour.
///
/// Plans heavier than the capacity are evaluated as long as every leg keeps a
/// positive speed.
pub fn evaluate(ctx: &TourContext, plan: &PackingPlan) -> Result<f64> {
    let inst = ctx.instance();
    let nu = ctx.nu();
    let mut carried = 0.0;
    let mut time = 0.0;
    for (k, (&city, &leg)) in ctx.tour().iter().zip(ctx.legs()).enumerate() {
        carried += plan.load_by_city[city - 1];
        let speed = travel_speed(inst.v_max, nu, carried);
        if !(speed > 0.0) {
            return Err(Error::NonPositiveSpeed { position: k, speed });
        }
        time += leg / speed;
    }
    Ok(plan.total_profit - inst.renting_rate * time)
}

/// Objective after adding item slot `j` to `plan`, given the plan's current
/// objective. Only the legs from the item's city onward are re-timed.
pub fn evaluate_delta(
    ctx: &TourContext,
    plan: &PackingPlan,
    j: usize,
    current_z: f64,
) -> Result<f64> {
    let inst = ctx.instance();
    let nu = ctx.nu();
    let start = ctx.item_position(j);
    // Under a chance constraint the per-city loads are expected weights, which
    // coincide with the nominal ones.
    let extra = inst.items[j].weight;
    let mut carried = 0.0;
    let mut old_time = 0.0;
    let mut new_time = 0.0;
    for (k, (&city, &leg)) in ctx.tour().iter().zip(ctx.legs()).enumerate() {
        carried += plan.load_by_city[city - 1];
        if k < start {
            continue;
        }
        let speed = travel_speed(inst.v_max, nu, carried + extra);
        if !(speed > 0.0) {
            return Err(Error::NonPositiveSpeed { position: k, speed });
        }
        old_time += leg / travel_speed(inst.v_max, nu, carried);
        new_time += leg / speed;
    }
    Ok(current_z + inst.items[j].profit - inst.renting_rate * (new_time - old_time))
}

/// Deterministic knapsack constraint, inclusive at the boundary.
pub fn check_capacity(plan: &PackingPlan, capacity: f64) -> bool {
    plan.total_weight <= capacity
}

pub fn surrogate_weight_hoeffding(plan: &PackingPlan, spec: &StochasticSpec) -> f64 {
    hoeffding_surrogate(plan.mu_y, plan.count, spec.delta, spec.alpha)
}

pub fn surrogate_weight_chebyshev(plan: &PackingPlan, spec: &StochasticSpec) -> f64 {
    chebyshev_surrogate(plan.mu_y, plan.var_y, spec.alpha)
}

/// Surrogate weight under the spec's resolved bound.
pub fn surrogate_weight(plan: &PackingPlan, spec: &StochasticSpec) -> f64 {
    spec.surrogate(plan.mu_y, plan.count, plan.var_y)
}

/// The weight compared against the capacity: nominal in deterministic mode,
/// the surrogate in chance mode.
pub fn constrained_weight(plan: &PackingPlan, mode: &Mode) -> f64 {
    match mode {
        Mode::Deterministic => plan.total_weight,
        Mode::Chance(spec) => surrogate_weight(plan, spec),
    }
}

pub fn is_feasible(plan: &PackingPlan, ctx: &TourContext, mode: &Mode) -> bool {
    let capacity = ctx.instance().capacity;
    match mode {
        Mode::Deterministic => check_capacity(plan, capacity),
        Mode::Chance(spec) => surrogate_weight(plan, spec) <= capacity,
    }
}

/// Whether adding item slot `j` keeps `plan` feasible under `mode`.
pub fn fits(ctx: &TourContext, plan: &PackingPlan, mode: &Mode, j: usize) -> bool {
    let inst = ctx.instance();
    match mode {
        Mode::Deterministic => plan.total_weight + inst.items[j].weight <= inst.capacity,
        Mode::Chance(spec) => {
            spec.surrogate(
                plan.mu_y + spec.mu[j],
                plan.count + 1,
                plan.var_y + spec.sigma_sq[j],
            ) <= inst.capacity
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::toy4;
    use approx::assert_relative_eq;

    fn ctx() -> TourContext {
        TourContext::new(toy4(), vec![1, 2, 3, 4]).unwrap()
    }

    fn plan(ids: &[usize]) -> PackingPlan {
        PackingPlan::from_ids(&toy4(), &Mode::Deterministic, ids).unwrap()
    }

    #[test]
    fn toy4_objective_values() {
        let ctx = ctx();
        assert_eq!(evaluate(&ctx, &plan(&[])).unwrap(), -4.0);
        assert_relative_eq!(
            evaluate(&ctx, &plan(&[1])).unwrap(),
            41.5,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            evaluate(&ctx, &plan(&[2, 3])).unwrap(),
            50.0 - (2.0 + 1.0 / 0.7 + 1.0 / 0.4),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            evaluate(&ctx, &plan(&[1, 3])).unwrap(),
            64.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn delta_matches_full_evaluation() {
        let ctx = ctx();
        let p = plan(&[3]);
        let z = evaluate(&ctx, &p).unwrap();
        assert_relative_eq!(
            evaluate_delta(&ctx, &p, 0, z).unwrap(),
            64.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn add_then_remove_restores_objective() {
        let ctx = ctx();
        let inst = toy4();
        let mut p = plan(&[2]);
        let z0 = evaluate(&ctx, &p).unwrap();
        p.add(&inst, &Mode::Deterministic, 0);
        p.remove(&inst, &Mode::Deterministic, 0);
        assert_eq!(evaluate(&ctx, &p).unwrap(), z0);
        assert_eq!(p, plan(&[2]));
    }

    #[test]
    fn overload_reports_leg() {
        let ctx = ctx();
        let mut inst = toy4();
        inst.capacity = 5.0;
        let ctx5 = TourContext::new(inst.clone(), vec![1, 2, 3, 4]).unwrap();
        let p = PackingPlan::from_ids(&inst, &Mode::Deterministic, &[1]).unwrap();
        // nu = 0.18, speed after city 2 = 1 - 1.8 < 0
        assert!(matches!(
            evaluate(&ctx5, &p),
            Err(Error::NonPositiveSpeed { position: 1, .. })
        ));
        assert!(evaluate(&ctx, &p).is_ok());
    }

    #[test]
    fn capacity_is_inclusive() {
        assert!(check_capacity(&plan(&[1, 3]), 15.0));
        assert!(!check_capacity(&plan(&[1, 2, 3]), 15.0));
        assert!(check_capacity(&plan(&[]), 15.0));
        assert!(is_feasible(&plan(&[1, 3]), &ctx(), &Mode::Deterministic));
    }

    #[test]
    fn surrogate_numerics() {
        assert_eq!(hoeffding_surrogate(0.0, 0, 2.0, 0.9), 0.0);
        assert!((hoeffding_surrogate(10.0, 2, 2.0, 0.9) - 16.069708).abs() < 1e-6);
        assert!((hoeffding_surrogate(0.0, 1, 20.0, 0.999) - 74.338444).abs() < 1e-6);
        assert_eq!(chebyshev_surrogate(0.0, 0.0, 0.9), 0.0);
        assert!((chebyshev_surrogate(10.0, 8.0 / 3.0, 0.9) - 14.898979).abs() < 1e-6);
        assert_eq!(chebyshev_surrogate(7.5, 0.0, 0.9), 7.5);
    }

    #[test]
    fn chance_feasibility_on_toy4() {
        let inst = toy4();
        let ctx = ctx();
        let spec = StochasticSpec::uniform(&inst, 2.0, 0.9, Bound::Chebyshev).unwrap();
        let mode = Mode::Chance(spec.clone());
        let p = PackingPlan::from_ids(&inst, &mode, &[1, 3]).unwrap();
        let w = surrogate_weight_chebyshev(&p, &spec);
        assert_relative_eq!(w, 15.0 + 3.0 * (8.0f64 / 3.0).sqrt(), max_relative = 1e-12);
        assert!(!is_feasible(&p, &ctx, &mode));

        let zero =
            Mode::Chance(StochasticSpec::uniform(&inst, 0.0, 0.9, Bound::Hoeffding).unwrap());
        for ids in [&[][..], &[1], &[1, 3], &[1, 2, 3]] {
            let a = PackingPlan::from_ids(&inst, &zero, ids).unwrap();
            let b = PackingPlan::from_ids(&inst, &Mode::Deterministic, ids).unwrap();
            assert_eq!(
                is_feasible(&a, &ctx, &zero),
                is_feasible(&b, &ctx, &Mode::Deterministic)
            );
        }
    }

    #[test]
    fn auto_bound_split() {
        assert_eq!(Bound::Auto.resolve(0.9), Bound::Chebyshev);
        assert_eq!(Bound::Auto.resolve(0.999), Bound::Hoeffding);
        assert_eq!(Bound::Hoeffding.resolve(0.5), Bound::Hoeffding);
    }

    #[test]
    fn invalid_specs() {
        let inst = toy4();
        assert!(StochasticSpec::uniform(&inst, 1.0, 1.0, Bound::Auto).is_err());
        assert!(StochasticSpec::uniform(&inst, 1.0, 0.0, Bound::Auto).is_err());
        assert!(StochasticSpec::uniform(&inst, -1.0, 0.5, Bound::Auto).is_err());
        assert!(PackingPlan::from_ids(&inst, &Mode::Deterministic, &[4]).is_err());
    }

    #[test]
    fn plan_record_json() {
        let rec = plan(&[1, 3]).record(64.0, None);
        let json = serde_json::to_string(&rec).unwrap();
        assert_eq!(
            json,
            r#"{"selected":[1,3],"objective":64.0,"weight":15.0,"surrogate_weight":null}"#
        );
    }
}
