//! Demand assignment to a fixed order set.
//!
//! Each item's LP shares are stretched by 5/2 (capped so prefixes stay at
//! most 1) and then routed by max-flow from "share at period s" nodes to
//! open periods in `[s, r_i]`, so no unit is ever moved earlier than the
//! stretched LP solution placed it.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::flow::{EdgeId, FlowGraph};
use crate::instance::{hcost, prefix_sum, CmilsInstance};
use crate::interval::all_intervals;
use crate::num::{self, frac, Exact, Rational};
use crate::InvariantViolation;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AssignmentError {
    #[error("order set cannot absorb the stretched demand: routed {routed} of {total}")]
    Infeasible { routed: String, total: String },
    #[error("assignment input malformed: {0}")]
    Malformed(String),
}

impl From<InvariantViolation> for AssignmentError {
    fn from(e: InvariantViolation) -> Self {
        AssignmentError::Malformed(e.0)
    }
}

/// `x′_{s,i} = min{(5/2) x_{s,i}, 1 − x′_{[s−1],i}}`, checked against the
/// closed form `x′_{[t],i} = min{(5/2) x_{[t],i}, 1}`.
pub fn build_xprime(inst: &CmilsInstance, x: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>, InvariantViolation> {
    let stretch = frac(5, 2);
    let one = Rational::one();
    let mut out = Vec::with_capacity(x.len());
    for (i, row) in x.iter().enumerate() {
        ensure!(
            row.len() == inst.items[i].deadline,
            "item {i}: {} shares for deadline {}",
            row.len(),
            inst.items[i].deadline
        );
        let mut prefix = Rational::zero();
        let mut stretched = Vec::with_capacity(row.len());
        for v in row {
            let next = num::min(&(&stretch * v), &(&one - &prefix));
            prefix += &next;
            stretched.push(next);
        }
        for t in 1..=row.len() {
            let closed = num::min(&(&stretch * prefix_sum(row, t)), &one);
            ensure!(
                prefix_sum(&stretched, t) == closed,
                "item {i}: stretched prefix at {t} is not min(5/2 x, 1)"
            );
        }
        out.push(stretched);
    }
    Ok(out)
}

/// Routes `x′_{s,i} d_i` units from each share node to open periods in
/// `[s, r_i]` within capacities. Returns shares `x*[i][s − 1]` that sum to
/// 1 per item, or `Infeasible` when the order set is short somewhere.
pub fn solve_assignment(
    inst: &CmilsInstance,
    orders: &BTreeSet<usize>,
    xprime: &[Vec<Rational>],
) -> Result<Vec<Vec<Rational>>, AssignmentError> {
    ensure!(
        orders.iter().all(|s| (1..=inst.horizon).contains(s)),
        "order set {orders:?} leaves the horizon"
    );
    ensure!(xprime.len() == inst.num_items(), "shares for {} items", xprime.len());
    let mut g = FlowGraph::new(2);
    let (source, sink) = (0, 1);
    let mut period_node = BTreeMap::new();
    for &s in orders {
        let v = g.add_node();
        g.add_edge(v, sink, Some(inst.capacity(s).clone()), Rational::zero());
        period_node.insert(s, v);
    }
    let mut edges: Vec<(usize, usize, EdgeId)> = Vec::new();
    let mut total = Rational::zero();
    for (i, row) in xprime.iter().enumerate() {
        let it = &inst.items[i];
        ensure!(row.len() == it.deadline, "item {i}: {} shares for deadline {}", row.len(), it.deadline);
        for (k, share) in row.iter().enumerate() {
            if share.is_zero() {
                continue;
            }
            let supply = share * &it.demand;
            total += &supply;
            let u = g.add_node();
            g.add_edge(source, u, Some(supply.clone()), Rational::zero());
            for (&sp, &v) in period_node.range(k + 1..=it.deadline) {
                let e = g.add_edge(u, v, Some(supply.clone()), Rational::zero());
                edges.push((i, sp, e));
            }
        }
    }
    let routed = g.max_flow(source, sink).expect("source edges are finite");
    if routed < total {
        return Err(AssignmentError::Infeasible {
            routed: Exact(&routed).to_string(),
            total: Exact(&total).to_string(),
        });
    }
    let mut xstar: Vec<Vec<Rational>> = inst.items.iter().map(|it| vec![Rational::zero(); it.deadline]).collect();
    for (i, sp, e) in edges {
        let f = g.flow(e);
        if !f.is_zero() {
            xstar[i][sp - 1] += f / &inst.items[i].demand;
        }
    }
    Ok(xstar)
}

/// `hcost(x*) <= (5/2) hcost(x)`.
pub fn hcost_bound_check(inst: &CmilsInstance, x: &[Vec<Rational>], xstar: &[Vec<Rational>]) -> bool {
    hcost(inst, xstar) <= frac(5, 2) * hcost(inst, x)
}

/// `x*_{[t],i} <= min{(5/2) x_{[t],i}, 1}` for every item and `t <= r_i`.
pub fn prefix_dominated(x: &[Vec<Rational>], xstar: &[Vec<Rational>]) -> bool {
    let stretch = frac(5, 2);
    x.iter().zip(xstar).all(|(row, srow)| {
        (1..=row.len()).all(|t| prefix_sum(srow, t) <= num::min(&(&stretch * prefix_sum(row, t)), &Rational::one()))
    })
}

/// Interval form of the Hall condition: for every `(a, b]`,
/// `Σ_{i : r_i ∈ (a,b]} x′_{(a,r_i],i} d_i <= C(S* ∩ (a,b])`.
pub fn interval_conditions_hold(inst: &CmilsInstance, orders: &BTreeSet<usize>, xprime: &[Vec<Rational>]) -> bool {
    all_intervals(inst.horizon).all(|iv| {
        let need = inst
            .items
            .iter()
            .zip(xprime)
            .filter(|(it, _)| iv.contains(it.deadline))
            .fold(Rational::zero(), |acc, (it, row)| {
                acc + (prefix_sum(row, it.deadline) - prefix_sum(row, iv.a)) * &it.demand
            });
        let have = num::sum(iv.periods().filter(|s| orders.contains(s)).map(|s| inst.capacity(s)));
        need <= have
    })
}

/// Hall's condition over every subset of positive-supply share nodes.
/// Nodes reaching the same open periods are merged first, since a worst
/// subset takes all or none of them. `None` when more than `max_nodes`
/// merged nodes remain.
pub fn hall_subsets_hold(
    inst: &CmilsInstance,
    orders: &BTreeSet<usize>,
    xprime: &[Vec<Rational>],
    max_nodes: usize,
) -> Option<bool> {
    let mut classes: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    for (i, row) in xprime.iter().enumerate() {
        let it = &inst.items[i];
        for (k, share) in row.iter().enumerate() {
            if !share.is_zero() {
                let reach: Vec<usize> = orders.range(k + 1..=it.deadline).copied().collect();
                *classes.entry(reach).or_insert_with(Rational::zero) += share * &it.demand;
            }
        }
    }
    let nodes: Vec<(Vec<usize>, Rational)> = classes.into_iter().collect();
    if nodes.len() > max_nodes {
        return None;
    }
    let ok = (1u64..(1u64 << nodes.len())).all(|mask| {
        let mut supply = Rational::zero();
        let mut reach = BTreeSet::new();
        for (k, (periods, amount)) in nodes.iter().enumerate() {
            if mask >> k & 1 == 1 {
                supply += amount;
                reach.extend(periods.iter().copied());
            }
        }
        num::sum(reach.iter().map(|s| inst.capacity(*s))) >= supply
    });
    Some(ok)
}
