//! Laminar knapsack covering by iterative rounding.
//!
//! Each outer iteration drops dominated members, solves the residual LP to a
//! vertex, discards knapsacks at 0 and selects knapsacks at 1, updating the
//! residual requirements of the members that contain them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::interval::Interval;
use crate::lp::{self, Bound, LinearProgram, LpStatus, Relation};
use crate::num::{self, int, Exact, Rational};
use crate::InvariantViolation;

/// Knapsacks `1..=T` and a laminar family of members, each with a positive
/// requirement (members without an entry require nothing).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaminarKcInstance {
    pub horizon: usize,
    pub capacities: Vec<Rational>,
    pub costs: Vec<Rational>,
    pub members: Vec<Interval>,
    pub requirements: BTreeMap<Interval, Rational>,
}

impl LaminarKcInstance {
    pub fn capacity_within(&self, set: &BTreeSet<usize>, iv: &Interval) -> Rational {
        num::sum(iv.periods().filter(|s| set.contains(s)).map(|s| &self.capacities[s - 1]))
    }

    pub fn cost_of(&self, set: &BTreeSet<usize>) -> Rational {
        num::sum(set.iter().map(|s| &self.costs[s - 1]))
    }

    pub fn is_covered_by(&self, set: &BTreeSet<usize>) -> bool {
        self.requirements
            .iter()
            .all(|(iv, r)| &self.capacity_within(set, iv) >= r)
    }

    pub fn is_laminar(&self) -> bool {
        self.members
            .iter()
            .enumerate()
            .all(|(k, a)| self.members[k + 1..].iter().all(|b| a.is_laminar_with(b)))
    }

    /// `max{R − C((a,b] ∩ S⁺), 0}` for every member with a requirement.
    pub fn residuals(&self, splus: &BTreeSet<usize>) -> BTreeMap<Interval, Rational> {
        self.requirements
            .iter()
            .map(|(iv, r)| (*iv, num::pos(r - self.capacity_within(splus, iv))))
            .collect()
    }
}

/// `Σ_{(a,b]∖S : C_s >= R} y_s`.
fn large_mass(iv: Interval, r: &Rational, y: &[Rational], fixed: &BTreeSet<usize>, capacities: &[Rational]) -> Rational {
    num::sum(
        iv.periods()
            .filter(|s| !fixed.contains(s) && &capacities[s - 1] >= r)
            .map(|s| &y[s - 1]),
    )
}

/// `Σ_{(a,b]∖S} min{C_s, R} y_s`.
fn capped_mass(iv: Interval, r: &Rational, y: &[Rational], fixed: &BTreeSet<usize>, capacities: &[Rational]) -> Rational {
    iv.periods()
        .filter(|s| !fixed.contains(s))
        .fold(Rational::zero(), |acc, s| acc + num::min(&capacities[s - 1], r) * &y[s - 1])
}

/// For `R̃ > 0`: `Σ_{(a,b]∖S⁺} min{C_s, R̃} y_s >= 2R̃` or
/// `Σ_{(a,b]∖S⁺ : C_s >= R̃} y_s >= 1`.
pub fn hypothesis_holds(
    iv: Interval,
    rtilde: &Rational,
    y: &[Rational],
    splus: &BTreeSet<usize>,
    capacities: &[Rational],
) -> bool {
    capped_mass(iv, rtilde, y, splus, capacities) >= int(2) * rtilde
        || large_mass(iv, rtilde, y, splus, capacities) >= Rational::one()
}

/// Mutable state of the rounding loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundingState {
    /// Discarded knapsacks (`y_s = 0`).
    pub scirc: BTreeSet<usize>,
    /// Selected knapsacks (`y_s = 1`).
    pub sstar: BTreeSet<usize>,
    /// Residual requirement of each active member.
    pub rhat: BTreeMap<Interval, Rational>,
    /// Active members constrained by capped mass (`>= 2R̂`).
    pub capped: BTreeSet<Interval>,
    /// Active members constrained by large-knapsack mass (`>= 1`).
    pub large: BTreeSet<Interval>,
    pub y: Vec<Rational>,
}

impl RoundingState {
    pub fn active(&self) -> impl Iterator<Item = &Interval> {
        self.capped.iter().chain(&self.large)
    }

    pub fn is_done(&self) -> bool {
        self.capped.is_empty() && self.large.is_empty()
    }

    fn large_row_holds(&self, iv: Interval, capacities: &[Rational], y: &[Rational]) -> bool {
        large_mass(iv, &self.rhat[&iv], y, &self.sstar, capacities) >= Rational::one()
    }

    fn remove(&mut self, iv: &Interval) {
        self.capped.remove(iv);
        self.large.remove(iv);
        self.rhat.remove(iv);
    }

    /// Periods of `iv` not yet fixed either way.
    pub fn residual_support(&self, iv: &Interval) -> Vec<usize> {
        iv.periods()
            .filter(|s| !self.scirc.contains(s) && !self.sstar.contains(s))
            .collect()
    }

    /// `y` satisfies the residual LP of this state exactly.
    pub fn admits(&self, inst: &LaminarKcInstance, y: &[Rational]) -> bool {
        let boxes = y.iter().all(|v| v >= &Rational::zero() && v <= &Rational::one());
        let fixings = self.scirc.iter().all(|s| y[s - 1].is_zero()) && self.sstar.iter().all(|s| y[s - 1].is_one());
        let capped_rows = self.capped.iter().all(|iv| {
            let r = &self.rhat[iv];
            capped_mass(*iv, r, y, &self.sstar, &inst.capacities) >= int(2) * r
        });
        let large_rows = self.large.iter().all(|iv| self.large_row_holds(*iv, &inst.capacities, y));
        boxes && fixings && capped_rows && large_rows
    }
}

fn join_intervals(set: &BTreeSet<Interval>) -> String {
    set.iter().map(|iv| iv.to_string()).collect::<Vec<_>>().join(", ")
}

/// What the rounding loop did, one event per state change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Init,
    Dedup,
    SolveLp,
    Discard,
    Select,
    Residual,
    Drop,
    Migrate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub iteration: usize,
    pub step: Step,
    pub detail: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "iter {} {:?}: {}", self.iteration, self.step, self.detail)
    }
}

/// Initial state: `S° = ∅`, `S* = S⁺`, `R̂ = R̃`, members with `R̂ > 0`
/// split by which hypothesis row they satisfy.
pub fn init_state(
    inst: &LaminarKcInstance,
    y: &[Rational],
    splus: &BTreeSet<usize>,
    rtilde: &BTreeMap<Interval, Rational>,
) -> Result<RoundingState, InvariantViolation> {
    ensure!(y.len() == inst.horizon, "order vector has {} entries for horizon {}", y.len(), inst.horizon);
    ensure!(
        y.iter().all(|v| v >= &Rational::zero() && v <= &Rational::one()),
        "order vector leaves [0, 1]"
    );
    let ones: BTreeSet<usize> = (1..=inst.horizon).filter(|&s| y[s - 1].is_one()).collect();
    ensure!(&ones == splus, "S+ {splus:?} differs from the unit coordinates {ones:?}");
    ensure!(inst.is_laminar(), "member family is not laminar");
    let expected = inst.residuals(splus);
    let mut state = RoundingState {
        scirc: BTreeSet::new(),
        sstar: splus.clone(),
        rhat: BTreeMap::new(),
        capped: BTreeSet::new(),
        large: BTreeSet::new(),
        y: y.to_vec(),
    };
    for (iv, rt) in rtilde {
        let want = expected.get(iv).cloned().unwrap_or_else(Rational::zero);
        ensure!(rt == &want, "residual for {iv} is {} but should be {}", Exact(rt), Exact(&want));
    }
    for (iv, rt) in expected {
        if rt.is_zero() {
            continue;
        }
        ensure!(
            hypothesis_holds(iv, &rt, y, splus, &inst.capacities),
            "member {iv} fails the laminar hypothesis"
        );
        state.rhat.insert(iv, rt);
        if state.large_row_holds(iv, &inst.capacities, y) {
            state.large.insert(iv);
        } else {
            state.capped.insert(iv);
        }
    }
    Ok(state)
}

/// Among active members with the same residual support keeps only one with
/// the largest `R̂` (ties: the lexicographically smallest interval).
/// Returns the removed members.
pub fn dedup(state: &mut RoundingState) -> Vec<Interval> {
    let mut keeper: BTreeMap<Vec<usize>, Interval> = BTreeMap::new();
    let mut removed = Vec::new();
    let active: Vec<Interval> = {
        let mut v: Vec<Interval> = state.active().copied().collect();
        v.sort();
        v
    };
    for iv in active {
        let support = state.residual_support(&iv);
        match keeper.get(&support).copied() {
            None => {
                keeper.insert(support, iv);
            }
            Some(kept) => {
                if state.rhat[&iv] > state.rhat[&kept] {
                    removed.push(kept);
                    keeper.insert(support, iv);
                } else {
                    removed.push(iv);
                }
            }
        }
    }
    for iv in &removed {
        state.remove(iv);
    }
    removed.sort();
    removed
}

/// Residual LP: `min Σ K_s y_s` with a capped-mass row per capped member, a
/// large-mass row per large member, and `S°`/`S*` fixed through bounds.
pub fn build_iter_lp(state: &RoundingState, inst: &LaminarKcInstance) -> LinearProgram {
    let mut lp = LinearProgram::new(inst.horizon);
    lp.objective = inst.costs.clone();
    for s in &state.scirc {
        lp.bounds[s - 1] = Bound::fixed(int(0));
    }
    for s in &state.sstar {
        lp.bounds[s - 1] = Bound::fixed(int(1));
    }
    for iv in &state.capped {
        let r = &state.rhat[iv];
        let coeffs = iv
            .periods()
            .filter(|s| !state.sstar.contains(s))
            .map(|s| (s - 1, num::min(&inst.capacities[s - 1], r)))
            .collect();
        lp.add_row(coeffs, Relation::Ge, int(2) * r);
    }
    for iv in &state.large {
        let r = &state.rhat[iv];
        let coeffs = iv
            .periods()
            .filter(|s| !state.sstar.contains(s) && &inst.capacities[s - 1] >= r)
            .map(|s| (s - 1, int(1)))
            .collect();
        lp.add_row(coeffs, Relation::Ge, int(1));
    }
    lp
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaminarOutcome {
    pub orders: BTreeSet<usize>,
    pub outer_iterations: usize,
    /// Residual-LP feasibility checks of the incoming `y` at loop heads.
    pub head_checks: usize,
    /// `Σ K_s y_s` of the input and after every LP solve.
    pub objective_history: Vec<Rational>,
    pub trace: Vec<TraceEvent>,
}

/// Iterative rounding. Returns `S* ⊇ S⁺` covering every member with
/// `K(S*) <= Σ y_s K_s`. `S⁺` must be exactly the unit coordinates of `y`
/// and every member with `R̃ > 0` must satisfy [`hypothesis_holds`].
pub fn solve(
    inst: &LaminarKcInstance,
    y: &[Rational],
    splus: &BTreeSet<usize>,
    rtilde: &BTreeMap<Interval, Rational>,
) -> Result<LaminarOutcome, InvariantViolation> {
    let mut state = init_state(inst, y, splus, rtilde)?;
    let mut trace = vec![TraceEvent {
        iteration: 0,
        step: Step::Init,
        detail: format!(
            "S*={:?} capped={{{}}} large={{{}}}",
            state.sstar,
            join_intervals(&state.capped),
            join_intervals(&state.large)
        ),
    }];
    let objective = |v: &[Rational]| v.iter().zip(&inst.costs).fold(Rational::zero(), |acc, (y, k)| acc + y * k);
    let budget = objective(y);
    let mut history = vec![budget.clone()];
    let mut iteration = 0;
    let mut head_checks = 0;

    while !state.is_done() {
        iteration += 1;
        ensure!(
            iteration <= inst.horizon,
            "outer loop exceeded {} iterations",
            inst.horizon
        );
        ensure!(
            state.admits(inst, &state.y),
            "iteration {iteration}: current y is infeasible for the residual LP"
        );
        head_checks += 1;

        for iv in dedup(&mut state) {
            trace.push(TraceEvent {
                iteration,
                step: Step::Dedup,
                detail: iv.to_string(),
            });
        }

        let lp = build_iter_lp(&state, inst);
        let sol = lp::solve_to_vertex(&lp)?;
        ensure!(
            sol.status == LpStatus::Optimal,
            "iteration {iteration}: residual LP is {:?}",
            sol.status
        );
        ensure!(lp::verify_vertex(&lp, &sol), "iteration {iteration}: LP optimum is not a vertex");
        let prev = history.last().expect("seeded");
        ensure!(
            &sol.objective_value <= prev,
            "iteration {iteration}: objective rose from {} to {}",
            Exact(prev),
            Exact(&sol.objective_value)
        );
        history.push(sol.objective_value.clone());
        state.y = sol.values;
        trace.push(TraceEvent {
            iteration,
            step: Step::SolveLp,
            detail: format!("value {}", Exact(&sol.objective_value)),
        });

        let fixed_before = state.scirc.len() + state.sstar.len();
        for s in 1..=inst.horizon {
            if !state.scirc.contains(&s) && state.y[s - 1].is_zero() {
                state.scirc.insert(s);
                trace.push(TraceEvent {
                    iteration,
                    step: Step::Discard,
                    detail: s.to_string(),
                });
            }
        }
        while let Some(s) = (1..=inst.horizon).find(|s| !state.sstar.contains(s) && state.y[s - 1].is_one()) {
            state.sstar.insert(s);
            trace.push(TraceEvent {
                iteration,
                step: Step::Select,
                detail: s.to_string(),
            });
            let containing: Vec<Interval> = state.active().filter(|iv| iv.contains(s)).copied().collect();
            for iv in containing {
                let r = state.rhat.get_mut(&iv).expect("active member has a residual");
                *r -= &inst.capacities[s - 1];
                let r = r.clone();
                trace.push(TraceEvent {
                    iteration,
                    step: Step::Residual,
                    detail: format!("{iv} -> {}", Exact(&r)),
                });
                if r <= Rational::zero() {
                    state.remove(&iv);
                    trace.push(TraceEvent {
                        iteration,
                        step: Step::Drop,
                        detail: iv.to_string(),
                    });
                } else if state.capped.contains(&iv) && state.large_row_holds(iv, &inst.capacities, &state.y) {
                    state.capped.remove(&iv);
                    state.large.insert(iv);
                    trace.push(TraceEvent {
                        iteration,
                        step: Step::Migrate,
                        detail: iv.to_string(),
                    });
                }
            }
            ensure!(
                state.admits(inst, &state.y),
                "iteration {iteration}: selecting {s} broke residual LP feasibility"
            );
        }
        ensure!(
            state.scirc.len() + state.sstar.len() > fixed_before,
            "iteration {iteration}: vertex has no new integral coordinate"
        );
    }

    let orders = state.sstar;
    ensure!(orders.is_superset(splus), "selection dropped part of S+");
    for (iv, r) in &inst.requirements {
        let got = inst.capacity_within(&orders, iv);
        ensure!(&got >= r, "member {iv} covered {} < {}", Exact(&got), Exact(r));
    }
    let spent = inst.cost_of(&orders);
    ensure!(spent <= budget, "selection cost {} exceeds {}", Exact(&spent), Exact(&budget));
    Ok(LaminarOutcome {
        orders,
        outer_iterations: iteration,
        head_checks,
        objective_history: history,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::frac;

    fn single_member(caps: Vec<Rational>, costs: Vec<Rational>, r: Rational) -> LaminarKcInstance {
        let t = caps.len();
        LaminarKcInstance {
            horizon: t,
            capacities: caps,
            costs,
            members: vec![Interval::new(0, t)],
            requirements: BTreeMap::from([(Interval::new(0, t), r)]),
        }
    }

    #[test]
    fn empty_requirements_return_splus() {
        let inst = single_member(vec![int(3), int(3)], vec![int(1), int(1)], int(0));
        let inst = LaminarKcInstance {
            requirements: BTreeMap::new(),
            ..inst
        };
        let y = vec![int(1), frac(1, 2)];
        let out = solve(&inst, &y, &BTreeSet::from([1]), &BTreeMap::new()).unwrap();
        assert_eq!(out.orders, BTreeSet::from([1]));
        assert_eq!(out.outer_iterations, 0);
    }

    #[test]
    fn large_row_member_picks_cheaper_knapsack() {
        let inst = single_member(vec![int(4), int(4)], vec![int(1), int(5)], int(4));
        let y = vec![frac(1, 2), frac(1, 2)];
        let rtilde = inst.residuals(&BTreeSet::new());
        let state = init_state(&inst, &y, &BTreeSet::new(), &rtilde).unwrap();
        assert!(state.large.contains(&Interval::new(0, 2)));
        let out = solve(&inst, &y, &BTreeSet::new(), &rtilde).unwrap();
        assert_eq!(out.orders, BTreeSet::from([1]));
        assert!(out.outer_iterations <= 2);
        assert_eq!(out.head_checks, out.outer_iterations);
    }

    #[test]
    fn dedup_keeps_one_of_equal_supports() {
        let mut state = RoundingState {
            scirc: BTreeSet::from([3]),
            sstar: BTreeSet::new(),
            rhat: BTreeMap::from([(Interval::new(0, 2), int(2)), (Interval::new(0, 3), int(2)), (Interval::new(3, 4), int(1))]),
            capped: BTreeSet::from([Interval::new(0, 2), Interval::new(0, 3), Interval::new(3, 4)]),
            large: BTreeSet::new(),
            y: vec![int(0); 4],
        };
        let removed = dedup(&mut state);
        assert_eq!(removed, vec![Interval::new(0, 3)]);
        assert!(state.capped.contains(&Interval::new(0, 2)) && state.capped.contains(&Interval::new(3, 4)));
    }

    #[test]
    fn rejects_broken_hypothesis() {
        let inst = single_member(vec![int(4)], vec![int(1)], int(4));
        let y = vec![frac(1, 4)];
        let rtilde = inst.residuals(&BTreeSet::new());
        assert!(solve(&inst, &y, &BTreeSet::new(), &rtilde).is_err());
    }

    #[test]
    fn iter_lp_rows() {
        let inst = single_member(vec![int(4), int(3)], vec![int(1), int(1)], int(2));
        let y = vec![int(1), int(1)];
        let state = RoundingState {
            scirc: BTreeSet::new(),
            sstar: BTreeSet::new(),
            rhat: BTreeMap::from([(Interval::new(0, 2), int(2))]),
            capped: BTreeSet::from([Interval::new(0, 2)]),
            large: BTreeSet::new(),
            y: y.clone(),
        };
        let lp = build_iter_lp(&state, &inst);
        assert_eq!(lp.rows.len(), 1);
        assert_eq!(lp.rows[0].coeffs, vec![(0, int(2)), (1, int(2))]);
        assert_eq!(lp.rows[0].rhs, int(4));
        assert!(state.admits(&inst, &y));
        assert!(!state.admits(&inst, &[int(1), int(0)]));
    }
}
