//! Lot-sizing instances, schedules, validation, cost evaluation, generators
//! and the JSON interchange format.
//!
//! Periods are 1-based (`1..=T`); items are 0-based indices into
//! [`CmilsInstance::items`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::num::{self, format_rational, int, serde_rational, serde_rational_vec, Rational};

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schedule is infeasible: {0}")]
    Infeasible(String),
    #[error("invalid generator parameters: {0}")]
    BadParams(String),
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> InstanceError {
    InstanceError::Field {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub demand: Rational,
    /// Deadline period `r_i` in `1..=T`.
    pub deadline: usize,
    /// `holding[s - 1] = h_i(s)` for `s` in `1..=deadline`.
    pub holding: Vec<Rational>,
}

impl Item {
    /// `h_i(s)`; periods past the deadline are not valid order periods.
    pub fn holding_at(&self, s: usize) -> &Rational {
        &self.holding[s - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmilsInstance {
    pub horizon: usize,
    pub ordering_costs: Vec<Rational>,
    pub capacities: Vec<Rational>,
    pub items: Vec<Item>,
}

impl CmilsInstance {
    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn capacity(&self, s: usize) -> &Rational {
        &self.capacities[s - 1]
    }

    pub fn ordering_cost(&self, s: usize) -> &Rational {
        &self.ordering_costs[s - 1]
    }

    /// `C(S)`.
    pub fn capacity_of<'a>(&self, periods: impl IntoIterator<Item = &'a usize>) -> Rational {
        periods
            .into_iter()
            .fold(Rational::zero(), |acc, &s| acc + self.capacity(s))
    }

    /// `K(S)`.
    pub fn ordering_cost_of<'a>(&self, periods: impl IntoIterator<Item = &'a usize>) -> Rational {
        periods
            .into_iter()
            .fold(Rational::zero(), |acc, &s| acc + self.ordering_cost(s))
    }

    /// `d(I)`.
    pub fn demand_of<'a>(&self, items: impl IntoIterator<Item = &'a usize>) -> Rational {
        items
            .into_iter()
            .fold(Rational::zero(), |acc, &i| acc + &self.items[i].demand)
    }

    pub fn total_demand(&self) -> Rational {
        num::sum(self.items.iter().map(|it| &it.demand))
    }

    pub fn from_json_str(s: &str) -> Result<Self, InstanceError> {
        let raw: RawInstance = serde_json::from_str(s)?;
        raw.try_into()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&RawInstance::from(self)).expect("instance serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, InstanceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), InstanceError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string() + "\n").map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawItem {
    #[serde(with = "serde_rational")]
    d: Rational,
    r: usize,
    #[serde(with = "serde_rational_vec")]
    h: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    #[serde(rename = "T")]
    horizon: usize,
    #[serde(rename = "N")]
    num_items: usize,
    #[serde(rename = "K", with = "serde_rational_vec")]
    ordering_costs: Vec<Rational>,
    #[serde(rename = "C", with = "serde_rational_vec")]
    capacities: Vec<Rational>,
    items: Vec<RawItem>,
}

impl From<&CmilsInstance> for RawInstance {
    fn from(inst: &CmilsInstance) -> Self {
        RawInstance {
            horizon: inst.horizon,
            num_items: inst.items.len(),
            ordering_costs: inst.ordering_costs.clone(),
            capacities: inst.capacities.clone(),
            items: inst
                .items
                .iter()
                .map(|it| RawItem {
                    d: it.demand.clone(),
                    r: it.deadline,
                    h: it.holding.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<RawInstance> for CmilsInstance {
    type Error = InstanceError;

    fn try_from(raw: RawInstance) -> Result<Self, InstanceError> {
        let t = raw.horizon;
        if t == 0 {
            return Err(field_err("T", "must be positive"));
        }
        if raw.num_items == 0 {
            return Err(field_err("N", "must be positive"));
        }
        if raw.ordering_costs.len() != t {
            return Err(field_err(
                "K",
                format!("expected {t} entries, found {}", raw.ordering_costs.len()),
            ));
        }
        if raw.capacities.len() != t {
            return Err(field_err(
                "C",
                format!("expected {t} entries, found {}", raw.capacities.len()),
            ));
        }
        if raw.items.len() != raw.num_items {
            return Err(field_err(
                "items",
                format!("expected N = {} entries, found {}", raw.num_items, raw.items.len()),
            ));
        }
        let mut items = Vec::with_capacity(raw.items.len());
        for (i, it) in raw.items.into_iter().enumerate() {
            if it.r == 0 || it.r > t {
                return Err(field_err(
                    format!("items[{i}].r"),
                    format!("deadline {} outside 1..={t}", it.r),
                ));
            }
            if it.h.len() != it.r {
                return Err(field_err(
                    format!("items[{i}].h"),
                    format!("expected r = {} entries, found {}", it.r, it.h.len()),
                ));
            }
            items.push(Item {
                demand: it.d,
                deadline: it.r,
                holding: it.h,
            });
        }
        Ok(CmilsInstance {
            horizon: t,
            ordering_costs: raw.ordering_costs,
            capacities: raw.capacities,
            items,
        })
    }
}

/// One violated instance invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyHorizon,
    NoItems,
    LengthMismatch { field: &'static str, expected: usize, found: usize },
    NegativeOrderingCost { s: usize },
    NonPositiveCapacity { s: usize },
    NonPositiveDemand { i: usize },
    DeadlineOutOfRange { i: usize, deadline: usize },
    HoldingLength { i: usize, expected: usize, found: usize },
    HoldingIncreasing { i: usize, s: usize },
    HoldingNonzeroAtDeadline { i: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyHorizon => write!(f, "T must be positive"),
            Violation::NoItems => write!(f, "N must be positive"),
            Violation::LengthMismatch { field, expected, found } => {
                write!(f, "{field}: expected {expected} entries, found {found}")
            }
            Violation::NegativeOrderingCost { s } => write!(f, "K_{s} < 0"),
            Violation::NonPositiveCapacity { s } => write!(f, "C_{s} <= 0"),
            Violation::NonPositiveDemand { i } => write!(f, "d_{i} <= 0"),
            Violation::DeadlineOutOfRange { i, deadline } => {
                write!(f, "r_{i} = {deadline} outside [1, T]")
            }
            Violation::HoldingLength { i, expected, found } => {
                write!(f, "h[{i}]: expected {expected} entries, found {found}")
            }
            Violation::HoldingIncreasing { i, s } => {
                write!(f, "h non-increasing: h_{i}({}) < h_{i}({})", s, s + 1)
            }
            Violation::HoldingNonzeroAtDeadline { i } => write!(f, "h_i(r_i)=0 fails for item {i}"),
        }
    }
}

/// Lists every violated instance invariant. Global feasibility of the demands
/// is not checked here.
pub fn validate(inst: &CmilsInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let t = inst.horizon;
    if t == 0 {
        out.push(Violation::EmptyHorizon);
    }
    if inst.items.is_empty() {
        out.push(Violation::NoItems);
    }
    if inst.ordering_costs.len() != t {
        out.push(Violation::LengthMismatch {
            field: "K",
            expected: t,
            found: inst.ordering_costs.len(),
        });
    }
    if inst.capacities.len() != t {
        out.push(Violation::LengthMismatch {
            field: "C",
            expected: t,
            found: inst.capacities.len(),
        });
    }
    for (idx, k) in inst.ordering_costs.iter().enumerate() {
        if k.is_negative() {
            out.push(Violation::NegativeOrderingCost { s: idx + 1 });
        }
    }
    for (idx, c) in inst.capacities.iter().enumerate() {
        if !c.is_positive() {
            out.push(Violation::NonPositiveCapacity { s: idx + 1 });
        }
    }
    for (i, it) in inst.items.iter().enumerate() {
        if !it.demand.is_positive() {
            out.push(Violation::NonPositiveDemand { i });
        }
        if it.deadline == 0 || it.deadline > t {
            out.push(Violation::DeadlineOutOfRange { i, deadline: it.deadline });
        }
        if it.holding.len() != it.deadline {
            out.push(Violation::HoldingLength {
                i,
                expected: it.deadline,
                found: it.holding.len(),
            });
            continue;
        }
        for s in 1..it.holding.len() {
            if it.holding[s - 1] < it.holding[s] {
                out.push(Violation::HoldingIncreasing { i, s });
            }
        }
        if it.holding.last().is_some_and(|h| !h.is_zero()) {
            out.push(Violation::HoldingNonzeroAtDeadline { i });
        }
    }
    out
}

/// `(x, y)` pair for the strengthened relaxation. `x[i][s - 1]` is the share
/// of item `i` ordered at period `s <= r_i`; `y[s - 1]` the order indicator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalSolution {
    pub x: Vec<Vec<Rational>>,
    pub y: Vec<Rational>,
}

impl FractionalSolution {
    /// `x_{s,i}`, zero past the deadline.
    pub fn x_at(&self, s: usize, i: usize) -> Rational {
        prefix_or_zero(&self.x[i], s)
    }

    /// `x_{[t],i}`.
    pub fn x_prefix(&self, t: usize, i: usize) -> Rational {
        prefix_sum(&self.x[i], t)
    }

    pub fn y_at(&self, s: usize) -> &Rational {
        &self.y[s - 1]
    }
}

fn prefix_or_zero(row: &[Rational], s: usize) -> Rational {
    if s >= 1 && s <= row.len() {
        row[s - 1].clone()
    } else {
        Rational::zero()
    }
}

/// `Σ_{s <= t} row[s - 1]`, clipped to the row length.
pub fn prefix_sum(row: &[Rational], t: usize) -> Rational {
    num::sum(row.iter().take(t))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostBreakdown {
    #[serde(with = "serde_rational")]
    pub ordering: Rational,
    #[serde(with = "serde_rational")]
    pub holding: Rational,
    #[serde(with = "serde_rational")]
    pub total: Rational,
}

/// Integral order set with a (possibly fractional) split of each item's
/// demand over the open periods. `assignment[(s, i)]` is in units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderSchedule {
    pub orders: BTreeSet<usize>,
    pub assignment: BTreeMap<(usize, usize), Rational>,
    pub costs: CostBreakdown,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAssignment {
    s: usize,
    i: usize,
    #[serde(with = "serde_rational")]
    qty: Rational,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    orders: Vec<usize>,
    assignment: Vec<RawAssignment>,
    costs: CostBreakdown,
}

impl OrderSchedule {
    /// Builds a schedule from per-item shares `share[i][s - 1]` (fractions of
    /// `d_i`), dropping zero entries, and prices it.
    pub fn from_shares(
        inst: &CmilsInstance,
        orders: BTreeSet<usize>,
        share: &[Vec<Rational>],
    ) -> Result<Self, InstanceError> {
        let mut assignment = BTreeMap::new();
        for (i, row) in share.iter().enumerate() {
            for (idx, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    assignment.insert((idx + 1, i), v * &inst.items[i].demand);
                }
            }
        }
        let mut sched = OrderSchedule {
            orders,
            assignment,
            costs: CostBreakdown {
                ordering: Rational::zero(),
                holding: Rational::zero(),
                total: Rational::zero(),
            },
        };
        sched.costs = cost(inst, &sched)?;
        Ok(sched)
    }

    pub fn from_json_str(s: &str) -> Result<Self, InstanceError> {
        let raw: RawSchedule = serde_json::from_str(s)?;
        let orders: BTreeSet<usize> = raw.orders.iter().copied().collect();
        if orders.len() != raw.orders.len() {
            return Err(field_err("orders", "duplicate period"));
        }
        let mut assignment = BTreeMap::new();
        for (k, a) in raw.assignment.into_iter().enumerate() {
            if assignment.insert((a.s, a.i), a.qty).is_some() {
                return Err(field_err(
                    format!("assignment[{k}]"),
                    format!("duplicate entry for (s={}, i={})", a.s, a.i),
                ));
            }
        }
        Ok(OrderSchedule {
            orders,
            assignment,
            costs: raw.costs,
        })
    }

    pub fn to_json_string(&self) -> String {
        let raw = RawSchedule {
            orders: self.orders.iter().copied().collect(),
            assignment: self
                .assignment
                .iter()
                .map(|(&(s, i), qty)| RawAssignment { s, i, qty: qty.clone() })
                .collect(),
            costs: self.costs.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("schedule serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, InstanceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), InstanceError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string() + "\n").map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleViolation {
    OrderOutOfRange { s: usize },
    UnknownItem { i: usize },
    PeriodOutOfRange { s: usize, i: usize },
    NegativeQuantity { s: usize, i: usize },
    NotOrdered { s: usize, i: usize },
    PastDeadline { s: usize, i: usize },
    DemandMismatch { i: usize, assigned: Rational, demand: Rational },
    CapacityExceeded { s: usize, load: Rational, capacity: Rational },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScheduleViolation::*;
        match self {
            OrderOutOfRange { s } => write!(f, "order period {s} outside [1, T]"),
            UnknownItem { i } => write!(f, "unknown item {i}"),
            PeriodOutOfRange { s, i } => write!(f, "item {i} assigned to period {s} outside [1, T]"),
            NegativeQuantity { s, i } => write!(f, "negative quantity for item {i} at period {s}"),
            NotOrdered { s, i } => write!(f, "item {i} assigned to period {s} without an order"),
            PastDeadline { s, i } => write!(f, "deadline violation: item {i} assigned to period {s} after r_{i}"),
            DemandMismatch { i, assigned, demand } => write!(
                f,
                "item {i}: assigned {} units, demand {}",
                format_rational(assigned),
                format_rational(demand)
            ),
            CapacityExceeded { s, load, capacity } => write!(
                f,
                "capacity violation at s={s}: load {} > C_{s} = {}",
                format_rational(load),
                format_rational(capacity)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub violations: Vec<ScheduleViolation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a schedule against the instance. The `costs` field is not examined.
pub fn check_feasible(inst: &CmilsInstance, sched: &OrderSchedule) -> FeasibilityReport {
    let t = inst.horizon;
    let n = inst.num_items();
    let mut violations = Vec::new();
    for &s in &sched.orders {
        if s == 0 || s > t {
            violations.push(ScheduleViolation::OrderOutOfRange { s });
        }
    }
    let mut assigned = vec![Rational::zero(); n];
    let mut load = vec![Rational::zero(); t];
    for (&(s, i), qty) in &sched.assignment {
        if i >= n {
            violations.push(ScheduleViolation::UnknownItem { i });
            continue;
        }
        if s == 0 || s > t {
            violations.push(ScheduleViolation::PeriodOutOfRange { s, i });
            continue;
        }
        if qty.is_negative() {
            violations.push(ScheduleViolation::NegativeQuantity { s, i });
        }
        if qty.is_positive() {
            if !sched.orders.contains(&s) {
                violations.push(ScheduleViolation::NotOrdered { s, i });
            }
            if s > inst.items[i].deadline {
                violations.push(ScheduleViolation::PastDeadline { s, i });
            }
        }
        assigned[i] += qty;
        load[s - 1] += qty;
    }
    for (i, it) in inst.items.iter().enumerate() {
        if assigned[i] != it.demand {
            violations.push(ScheduleViolation::DemandMismatch {
                i,
                assigned: assigned[i].clone(),
                demand: it.demand.clone(),
            });
        }
    }
    for s in 1..=t {
        if &load[s - 1] > inst.capacity(s) {
            violations.push(ScheduleViolation::CapacityExceeded {
                s,
                load: load[s - 1].clone(),
                capacity: inst.capacity(s).clone(),
            });
        }
    }
    FeasibilityReport { violations }
}

/// Ordering, holding and total cost of a feasible schedule.
pub fn cost(inst: &CmilsInstance, sched: &OrderSchedule) -> Result<CostBreakdown, InstanceError> {
    let report = check_feasible(inst, sched);
    if let Some(v) = report.violations.first() {
        return Err(InstanceError::Infeasible(v.to_string()));
    }
    let ordering = inst.ordering_cost_of(&sched.orders);
    let holding = sched
        .assignment
        .iter()
        .fold(Rational::zero(), |acc, (&(s, i), qty)| {
            acc + qty * inst.items[i].holding_at(s)
        });
    let total = &ordering + &holding;
    Ok(CostBreakdown { ordering, holding, total })
}

/// `hcost(x) = Σ_i d_i Σ_{s <= r_i} x_{s,i} h_i(s)` for shares `x[i][s - 1]`.
pub fn hcost(inst: &CmilsInstance, x: &[Vec<Rational>]) -> Rational {
    inst.items
        .iter()
        .zip(x)
        .fold(Rational::zero(), |acc, (it, row)| {
            let per_unit = row
                .iter()
                .zip(&it.holding)
                .fold(Rational::zero(), |a, (xv, h)| a + xv * h);
            acc + &it.demand * per_unit
        })
}

/// Parameters for [`gen_random`]. Ranges are inclusive integer ranges.
#[derive(Debug, Clone)]
pub struct GenParams {
    pub horizon: usize,
    pub items: usize,
    pub capacity_range: (i64, i64),
    pub cost_range: (i64, i64),
    pub demand_range: (i64, i64),
    /// Per-period holding rate; `h_i(s)` is the suffix sum of rates up to `r_i`.
    pub holding_rate_range: (i64, i64),
    pub slack_factor: Rational,
}

impl GenParams {
    pub fn new(horizon: usize, items: usize) -> Self {
        GenParams {
            horizon,
            items,
            capacity_range: (4, 24),
            cost_range: (1, 40),
            demand_range: (1, 12),
            holding_rate_range: (0, 4),
            slack_factor: int(1),
        }
    }
}

/// Deterministic random instance. Capacities are bumped so that for every
/// period `t` the capacity of `1..=t` is at least `slack_factor` times the
/// demand due by `t`, which makes the instance feasible.
pub fn gen_random(seed: u64, params: &GenParams) -> Result<CmilsInstance, InstanceError> {
    let check = |name: &str, (lo, hi): (i64, i64), min: i64| {
        if lo > hi {
            Err(InstanceError::BadParams(format!("{name} range [{lo}, {hi}] is empty")))
        } else if lo < min {
            Err(InstanceError::BadParams(format!("{name} range must start at >= {min}")))
        } else {
            Ok(())
        }
    };
    check("capacity", params.capacity_range, 1)?;
    check("cost", params.cost_range, 0)?;
    check("demand", params.demand_range, 1)?;
    check("holding rate", params.holding_rate_range, 0)?;
    if params.horizon == 0 || params.items == 0 {
        return Err(InstanceError::BadParams("T and N must be positive".into()));
    }
    if params.slack_factor < int(1) {
        return Err(InstanceError::BadParams("slack_factor must be >= 1".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = params.horizon;
    let draw = |rng: &mut ChaCha8Rng, (lo, hi): (i64, i64)| int(rng.gen_range(lo..=hi));

    let ordering_costs: Vec<Rational> = (0..t).map(|_| draw(&mut rng, params.cost_range)).collect();
    let mut capacities: Vec<Rational> =
        (0..t).map(|_| draw(&mut rng, params.capacity_range)).collect();
    let mut items = Vec::with_capacity(params.items);
    for _ in 0..params.items {
        let deadline = rng.gen_range(1..=t);
        let demand = draw(&mut rng, params.demand_range);
        let rates: Vec<Rational> = (1..deadline)
            .map(|_| draw(&mut rng, params.holding_rate_range))
            .collect();
        let mut holding = vec![Rational::zero(); deadline];
        for s in (1..deadline).rev() {
            holding[s - 1] = &holding[s] + &rates[s - 1];
        }
        items.push(Item { demand, deadline, holding });
    }

    let mut have = Rational::zero();
    for period in 1..=t {
        let due: Rational = items
            .iter()
            .filter(|it| it.deadline <= period)
            .fold(Rational::zero(), |acc, it| acc + &it.demand);
        let need = &params.slack_factor * due;
        have += &capacities[period - 1];
        if have < need {
            let bump = (&need - &have).ceil();
            capacities[period - 1] += &bump;
            have += bump;
        }
    }

    Ok(CmilsInstance {
        horizon: t,
        ordering_costs,
        capacities,
        items,
    })
}

/// Two-period single-item instance on which the plain facility-location
/// relaxation has value `1/R` while every integral solution costs 1.
pub fn gen_kc_gap(r: &Rational) -> Result<CmilsInstance, InstanceError> {
    if r < &int(2) {
        return Err(InstanceError::BadParams("gap instance needs R >= 2".into()));
    }
    Ok(CmilsInstance {
        horizon: 2,
        ordering_costs: vec![int(0), int(1)],
        capacities: vec![r - int(1), r.clone()],
        items: vec![Item {
            demand: r.clone(),
            deadline: 2,
            holding: vec![int(0), int(0)],
        }],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::frac;

    fn single(k: i64, c: i64, d: i64) -> CmilsInstance {
        CmilsInstance {
            horizon: 1,
            ordering_costs: vec![int(k)],
            capacities: vec![int(c)],
            items: vec![Item {
                demand: int(d),
                deadline: 1,
                holding: vec![int(0)],
            }],
        }
    }

    fn full_at_one(d: i64) -> OrderSchedule {
        OrderSchedule {
            orders: [1].into(),
            assignment: [((1, 0), int(d))].into(),
            costs: CostBreakdown {
                ordering: int(0),
                holding: int(0),
                total: int(0),
            },
        }
    }

    #[test]
    fn gap_instance_is_valid() {
        assert!(validate(&gen_kc_gap(&int(1000)).unwrap()).is_empty());
        assert!(gen_kc_gap(&int(1)).is_err());
    }

    #[test]
    fn increasing_holding_is_reported() {
        let mut inst = gen_kc_gap(&int(10)).unwrap();
        inst.items[0].holding = vec![int(0), int(1)];
        let v = validate(&inst);
        // h = (0, 1) is increasing and also nonzero at the deadline.
        assert!(v.contains(&Violation::HoldingIncreasing { i: 0, s: 1 }));
        assert!(v[0].to_string().contains("h non-increasing"));
    }

    #[test]
    fn nonzero_holding_at_deadline_is_reported() {
        let mut inst = gen_kc_gap(&int(10)).unwrap();
        inst.items[0].holding = vec![int(5), int(3)];
        assert_eq!(validate(&inst), vec![Violation::HoldingNonzeroAtDeadline { i: 0 }]);
        assert!(validate(&inst)[0].to_string().contains("h_i(r_i)=0"));
    }

    #[test]
    fn feasibility_exact_fit_and_capacity() {
        assert!(check_feasible(&single(7, 5, 5), &full_at_one(5)).is_feasible());
        let report = check_feasible(&single(7, 4, 5), &full_at_one(5));
        assert!(!report.is_feasible());
        assert!(matches!(
            report.violations[0],
            ScheduleViolation::CapacityExceeded { s: 1, .. }
        ));
    }

    #[test]
    fn feasibility_deadline() {
        let mut inst = single(1, 10, 5);
        inst.horizon = 2;
        inst.ordering_costs.push(int(1));
        inst.capacities.push(int(10));
        let sched = OrderSchedule {
            orders: [2].into(),
            assignment: [((2, 0), int(5))].into(),
            costs: full_at_one(5).costs,
        };
        let report = check_feasible(&inst, &sched);
        assert_eq!(report.violations, vec![ScheduleViolation::PastDeadline { s: 2, i: 0 }]);
    }

    #[test]
    fn cost_of_trivial_schedule() {
        let c = cost(&single(7, 5, 3), &full_at_one(3)).unwrap();
        assert_eq!((c.ordering, c.holding, c.total), (int(7), int(0), int(7)));
        assert!(cost(&single(7, 2, 3), &full_at_one(3)).is_err());
    }

    #[test]
    fn gap_embed_ordering_cost() {
        let inst = gen_kc_gap(&int(1000)).unwrap();
        let sched = OrderSchedule {
            orders: [1, 2].into(),
            assignment: [((1, 0), int(999)), ((2, 0), int(1))].into(),
            costs: full_at_one(0).costs,
        };
        assert_eq!(cost(&inst, &sched).unwrap().ordering, int(1));
    }

    #[test]
    fn hcost_examples() {
        let inst = gen_random(7, &GenParams::new(5, 3)).unwrap();
        let at_deadline: Vec<Vec<Rational>> = inst
            .items
            .iter()
            .map(|it| {
                let mut row = vec![int(0); it.deadline];
                row[it.deadline - 1] = int(1);
                row
            })
            .collect();
        assert_eq!(hcost(&inst, &at_deadline), int(0));

        let two = CmilsInstance {
            horizon: 2,
            ordering_costs: vec![int(0), int(0)],
            capacities: vec![int(5), int(5)],
            items: vec![Item {
                demand: int(2),
                deadline: 2,
                holding: vec![int(3), int(0)],
            }],
        };
        assert_eq!(hcost(&two, &[vec![frac(1, 2), frac(1, 2)]]), int(3));
    }

    #[test]
    fn generator_is_valid_and_deterministic() {
        let mut p = GenParams::new(6, 4);
        p.slack_factor = int(2);
        let a = gen_random(1, &p).unwrap();
        assert!(validate(&a).is_empty());
        assert_eq!(a, gen_random(1, &p).unwrap());
        assert_ne!(a, gen_random(2, &p).unwrap());
        // prefix capacity condition
        for t in 1..=6 {
            let due: Rational = a
                .items
                .iter()
                .filter(|it| it.deadline <= t)
                .fold(int(0), |acc, it| acc + &it.demand);
            assert!(a.capacity_of(&(1..=t).collect::<Vec<_>>()) >= int(2) * due);
        }
    }

    #[test]
    fn generator_rejects_bad_params() {
        let mut p = GenParams::new(3, 2);
        p.demand_range = (5, 1);
        assert!(gen_random(0, &p).is_err());
        let mut p = GenParams::new(3, 2);
        p.slack_factor = frac(1, 2);
        assert!(gen_random(0, &p).is_err());
    }

    #[test]
    fn json_round_trip_and_errors() {
        let inst = gen_random(1, &GenParams::new(6, 4)).unwrap();
        let text = inst.to_json_string();
        assert_eq!(CmilsInstance::from_json_str(&text).unwrap(), inst);

        let missing_c = r#"{"T":1,"N":1,"K":["1/1"],"items":[{"d":"1/1","r":1,"h":["0/1"]}]}"#;
        let err = CmilsInstance::from_json_str(missing_c).unwrap_err().to_string();
        assert!(err.contains("`C`"), "{err}");
        assert!(err.contains("line"), "{err}");

        let thirds = r#"{"T":1,"N":1,"K":["7/3"],"C":["2"],"items":[{"d":"1/1","r":1,"h":["0/1"]}]}"#;
        let parsed = CmilsInstance::from_json_str(thirds).unwrap();
        assert_eq!(parsed.ordering_costs[0], frac(7, 3));

        let short_h = r#"{"T":2,"N":1,"K":["1","1"],"C":["2","2"],"items":[{"d":"1","r":2,"h":["0"]}]}"#;
        let err = CmilsInstance::from_json_str(short_h).unwrap_err().to_string();
        assert!(err.contains("items[0].h"), "{err}");
    }

    #[test]
    fn schedule_json_round_trip() {
        let inst = gen_kc_gap(&int(4)).unwrap();
        let sched = OrderSchedule::from_shares(
            &inst,
            [1, 2].into(),
            &[vec![frac(3, 4), frac(1, 4)]],
        )
        .unwrap();
        let back = OrderSchedule::from_json_str(&sched.to_json_string()).unwrap();
        assert_eq!(back, sched);
        assert_eq!(back.costs.total, int(1));
    }
}
