//! Exact brute-force baselines, synthetic covering instances, and the
//! stand-alone interval-covering rounding loop. Used for verification only.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::flow::{EdgeId, FlowGraph};
use crate::instance::{CmilsInstance, InstanceError, OrderSchedule};
use crate::interval::{all_intervals, Interval};
use crate::interval_kc::{self, compute_rprime, IntervalKcInstance, IntervalKcOutcome};
use crate::laminar_kc::LaminarKcInstance;
use crate::lp::{self, LinearProgram, LpError, LpStatus, Relation};
use crate::num::{self, frac, int, Rational};
use crate::separation::scale_y;
use crate::InvariantViolation;

pub const MAX_CMILS_HORIZON: usize = 14;
pub const MAX_KC_HORIZON: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("horizon {horizon} exceeds the brute-force cap {cap}")]
    TooLarge { horizon: usize, cap: usize },
    #[error("no feasible solution exists")]
    Infeasible,
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Schedule(OrderSchedule),
    Periods(BTreeSet<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub optimum_cost: Rational,
    pub witness: Witness,
    /// Subsets examined.
    pub explored: u64,
}

fn mask_to_set(mask: u64, horizon: usize) -> BTreeSet<usize> {
    (1..=horizon).filter(|s| mask >> (s - 1) & 1 == 1).collect()
}

/// Cheapest way to serve every item from the open periods `orders`, as
/// per-item shares `x[i][s − 1]`, or `None` if the orders cannot absorb
/// all demand.
pub fn min_holding_assignment(inst: &CmilsInstance, orders: &BTreeSet<usize>) -> Option<(Rational, Vec<Vec<Rational>>)> {
    let mut g = FlowGraph::new(2);
    let (source, sink) = (0, 1);
    let mut period_node = BTreeMap::new();
    for &s in orders {
        let v = g.add_node();
        g.add_edge(v, sink, Some(inst.capacity(s).clone()), Rational::zero());
        period_node.insert(s, v);
    }
    let mut edges: Vec<(usize, usize, EdgeId)> = Vec::new();
    for (i, it) in inst.items.iter().enumerate() {
        let u = g.add_node();
        g.add_edge(source, u, Some(it.demand.clone()), Rational::zero());
        for (&s, &v) in period_node.range(1..=it.deadline) {
            edges.push((i, s, g.add_edge(u, v, None, it.holding_at(s).clone())));
        }
    }
    let total = inst.total_demand();
    let (sent, cost) = g.min_cost_flow(source, sink, &total);
    if sent < total {
        return None;
    }
    let mut x: Vec<Vec<Rational>> = inst.items.iter().map(|it| vec![Rational::zero(); it.deadline]).collect();
    for (i, s, e) in edges {
        let f = g.flow(e);
        if !f.is_zero() {
            x[i][s - 1] += f / &inst.items[i].demand;
        }
    }
    Some((cost, x))
}

/// The same transportation problem as an LP, for cross-checking the flow.
pub fn holding_transportation_lp(inst: &CmilsInstance, orders: &BTreeSet<usize>) -> Result<Option<Rational>, LpError> {
    let mut cols = Vec::new();
    for (i, it) in inst.items.iter().enumerate() {
        for &s in orders.range(1..=it.deadline) {
            cols.push((i, s));
        }
    }
    let mut lp = LinearProgram::new(cols.len());
    for b in lp.bounds.iter_mut() {
        *b = lp::Bound::non_negative();
    }
    for (k, (i, s)) in cols.iter().enumerate() {
        lp.objective[k] = inst.items[*i].holding_at(*s).clone();
    }
    for (i, it) in inst.items.iter().enumerate() {
        let coeffs = cols
            .iter()
            .enumerate()
            .filter(|(_, (ii, _))| *ii == i)
            .map(|(k, _)| (k, int(1)))
            .collect();
        lp.add_row(coeffs, Relation::Eq, it.demand.clone());
    }
    for &s in orders {
        let coeffs = cols
            .iter()
            .enumerate()
            .filter(|(_, (_, ss))| *ss == s)
            .map(|(k, _)| (k, int(1)))
            .collect();
        lp.add_row(coeffs, Relation::Le, inst.capacity(s).clone());
    }
    let sol = lp::solve_to_vertex(&lp)?;
    Ok(match sol.status {
        LpStatus::Optimal => Some(sol.objective_value),
        _ => None,
    })
}

/// Exact optimum over all order sets, each priced by min-cost flow.
pub fn brute_force_cmils(inst: &CmilsInstance) -> Result<OracleResult, OracleError> {
    let t = inst.horizon;
    if t > MAX_CMILS_HORIZON {
        return Err(OracleError::TooLarge {
            horizon: t,
            cap: MAX_CMILS_HORIZON,
        });
    }
    let mut best: Option<(Rational, BTreeSet<usize>, Vec<Vec<Rational>>)> = None;
    let mut explored = 0;
    for mask in 0u64..(1u64 << t) {
        let orders = mask_to_set(mask, t);
        let k = inst.ordering_cost_of(&orders);
        if best.as_ref().is_some_and(|(b, _, _)| &k >= b) {
            continue;
        }
        explored += 1;
        if inst.capacity_of(&orders) < inst.total_demand() {
            continue;
        }
        if let Some((h, x)) = min_holding_assignment(inst, &orders) {
            let total = &k + h;
            if best.as_ref().is_none_or(|(b, _, _)| &total < b) {
                best = Some((total, orders, x));
            }
        }
    }
    let (optimum_cost, orders, x) = best.ok_or(OracleError::Infeasible)?;
    let schedule = OrderSchedule::from_shares(inst, orders, &x)?;
    debug_assert_eq!(schedule.costs.total, optimum_cost);
    Ok(OracleResult {
        optimum_cost,
        witness: Witness::Schedule(schedule),
        explored,
    })
}

fn brute_force_cover(
    horizon: usize,
    costs: &[Rational],
    covered: impl Fn(&BTreeSet<usize>) -> bool,
) -> Result<OracleResult, OracleError> {
    if horizon > MAX_KC_HORIZON {
        return Err(OracleError::TooLarge {
            horizon,
            cap: MAX_KC_HORIZON,
        });
    }
    let mut best: Option<(Rational, BTreeSet<usize>)> = None;
    let mut explored = 0;
    for mask in 0u64..(1u64 << horizon) {
        let set = mask_to_set(mask, horizon);
        let cost = num::sum(set.iter().map(|s| &costs[s - 1]));
        if best.as_ref().is_some_and(|(b, _)| &cost >= b) {
            continue;
        }
        explored += 1;
        if covered(&set) {
            best = Some((cost, set));
        }
    }
    let (optimum_cost, set) = best.ok_or(OracleError::Infeasible)?;
    Ok(OracleResult {
        optimum_cost,
        witness: Witness::Periods(set),
        explored,
    })
}

pub fn brute_force_laminar_kc(inst: &LaminarKcInstance) -> Result<OracleResult, OracleError> {
    brute_force_cover(inst.horizon, &inst.costs, |s| inst.is_covered_by(s))
}

pub fn brute_force_interval_kc(inst: &IntervalKcInstance) -> Result<OracleResult, OracleError> {
    brute_force_cover(inst.horizon, &inst.costs, |s| inst.is_covered_by(s))
}

#[derive(Debug, Clone)]
pub struct CoverRounding {
    pub orders: BTreeSet<usize>,
    /// Value of the covering LP with all added knapsack-cover rows.
    pub lp_value: Rational,
    pub y: Vec<Rational>,
    pub rounds: usize,
    pub cuts: Vec<(Interval, BTreeSet<usize>)>,
    pub yhat: Vec<Rational>,
    pub splus: BTreeSet<usize>,
    pub rtilde: BTreeMap<Interval, Rational>,
    pub rounding: IntervalKcOutcome,
}

#[derive(Debug, thiserror::Error)]
pub enum CoverRoundingError {
    #[error("no rounding after {0} LP rounds")]
    RoundCap(usize),
    #[error("covering LP is {0:?}")]
    Status(LpStatus),
    #[error(transparent)]
    Invariant(#[from] InvariantViolation),
}

/// Interval covering by cut generation: solve `min Σ K_s y_s` subject to
/// `Σ_{(a,b]} C_s y_s >= R_{a,b}`, add the knapsack-cover inequality
/// `Σ_{s ∈ (a,b]∖S} min{C_s, R − C(S)} y_s >= R − C(S)` with
/// `S = S⁺ ∩ (a,b]` for the first interval that violates it, and round
/// `ŷ = min{10y, 1}` once none does.
pub fn corollary4_wrapper(ikc: &IntervalKcInstance, max_rounds: usize) -> Result<CoverRounding, CoverRoundingError> {
    let t = ikc.horizon;
    let mut lp = LinearProgram::new(t);
    lp.objective = ikc.costs.clone();
    for (iv, r) in &ikc.requirements {
        if r.is_zero() {
            continue;
        }
        let coeffs = iv.periods().map(|s| (s - 1, ikc.capacities[s - 1].clone())).collect();
        lp.add_row(coeffs, Relation::Ge, r.clone());
    }
    let mut cuts = Vec::new();
    for round in 1..=max_rounds {
        let sol = lp::solve_to_vertex(&lp).map_err(InvariantViolation::from)?;
        if sol.status != LpStatus::Optimal {
            return Err(CoverRoundingError::Status(sol.status));
        }
        let y = sol.values;
        let (yhat, splus) = scale_y(&y);
        let mut rtilde = BTreeMap::new();
        let mut violated = None;
        for iv in all_intervals(t) {
            let rt = num::pos(ikc.requirement(&iv) - ikc.capacity_within(&splus, &iv));
            if !rt.is_zero() && violated.is_none() {
                let free: Vec<usize> = iv.periods().filter(|s| !splus.contains(s)).collect();
                let lhs = free
                    .iter()
                    .fold(Rational::zero(), |acc, &s| acc + num::min(&ikc.capacities[s - 1], &rt) * &y[s - 1]);
                if lhs < rt {
                    violated = Some((iv, rt.clone(), free));
                }
            }
            rtilde.insert(iv, rt);
        }
        match violated {
            Some((iv, rt, free)) => {
                let coeffs = free
                    .iter()
                    .map(|&s| (s - 1, num::min(&ikc.capacities[s - 1], &rt)))
                    .collect();
                lp.add_row(coeffs, Relation::Ge, rt);
                cuts.push((iv, splus.iter().filter(|s| iv.contains(**s)).copied().collect()));
            }
            None => {
                let rounding = interval_kc::solve_interval_kc(ikc, &yhat, &splus, &rtilde)?;
                return Ok(CoverRounding {
                    orders: rounding.orders.clone(),
                    lp_value: sol.objective_value,
                    y,
                    rounds: round,
                    cuts,
                    yhat,
                    splus,
                    rtilde,
                    rounding,
                });
            }
        }
    }
    Err(CoverRoundingError::RoundCap(max_rounds))
}

/// Random interval-covering instance: capacities in `[1, 20]`, costs in
/// `[0, 30]`, and a requirement on roughly a third of the intervals, each
/// at most the interval's total capacity (so taking everything is feasible).
pub fn gen_interval_kc(seed: u64, horizon: usize) -> IntervalKcInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let capacities: Vec<Rational> = (0..horizon).map(|_| int(rng.gen_range(1..=20))).collect();
    let costs: Vec<Rational> = (0..horizon).map(|_| int(rng.gen_range(0..=30))).collect();
    let mut requirements = BTreeMap::new();
    for iv in all_intervals(horizon) {
        if rng.gen_bool(1.0 / 3.0) {
            let cap = num::sum(iv.periods().map(|s| &capacities[s - 1]));
            let share = frac(rng.gen_range(1..=8), 8);
            let r = (cap * share).ceil();
            requirements.insert(iv, r);
        }
    }
    IntervalKcInstance {
        horizon,
        capacities,
        costs,
        requirements,
    }
}

/// Synthetic laminar-covering input satisfying the rounding hypothesis by
/// construction: a random binary laminar tree over `(0, T]`, a random `y`
/// with some unit coordinates, and member residuals set to a random
/// fraction of the largest value the hypothesis allows.
#[derive(Debug, Clone)]
pub struct LaminarCase {
    pub instance: LaminarKcInstance,
    pub y: Vec<Rational>,
    pub splus: BTreeSet<usize>,
    pub rtilde: BTreeMap<Interval, Rational>,
}

pub fn gen_laminar_kc(seed: u64, horizon: usize) -> LaminarCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let capacities: Vec<Rational> = (0..horizon).map(|_| int(rng.gen_range(1..=20))).collect();
    let costs: Vec<Rational> = (0..horizon).map(|_| int(rng.gen_range(0..=30))).collect();
    let y: Vec<Rational> = (0..horizon)
        .map(|_| {
            if rng.gen_bool(0.2) {
                Rational::one()
            } else {
                frac(rng.gen_range(0..8), 8)
            }
        })
        .collect();
    let splus: BTreeSet<usize> = (1..=horizon).filter(|&s| y[s - 1].is_one()).collect();

    let mut members = Vec::new();
    let mut stack = vec![Interval::new(0, horizon)];
    while let Some(iv) = stack.pop() {
        members.push(iv);
        if iv.len() > 1 {
            let c = rng.gen_range(iv.a + 1..iv.b);
            stack.push(Interval::new(c, iv.b));
            stack.push(Interval::new(iv.a, c));
        }
    }

    let fractions = [frac(0, 1), frac(1, 2), frac(3, 4), frac(1, 1)];
    let mut requirements = BTreeMap::new();
    let mut rtilde = BTreeMap::new();
    for m in &members {
        let cap = compute_rprime(*m, &y, &splus, &capacities);
        let rt = cap * &fractions[rng.gen_range(0..fractions.len())];
        let secured = num::sum(m.periods().filter(|s| splus.contains(s)).map(|s| &capacities[s - 1]));
        let r = &rt + secured;
        if !r.is_zero() {
            requirements.insert(*m, r);
            rtilde.insert(*m, rt);
        }
    }
    LaminarCase {
        instance: LaminarKcInstance {
            horizon,
            capacities,
            costs,
            members,
            requirements,
        },
        y,
        splus,
        rtilde,
    }
}
