//! Strengthened lot-sizing relaxation, its covering-cut pool, and the
//! cutting-plane driver that produces the final schedule.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::assignment::{self, AssignmentError};
use crate::instance::{self, CmilsInstance, FractionalSolution, InstanceError, OrderSchedule, Violation};
use crate::interval_kc::{self, IntervalKcInstance, IntervalKcOutcome};
use crate::lp::{self, Bound, LinearProgram, LpError, LpStatus, Relation};
use crate::num::{self, frac, int, Exact, Rational};
use crate::separation::{self, ReadyPayload, RoundOutcome};
use crate::InvariantViolation;

/// One inequality of the covering family
/// `C(S1) + Σ_{s∈S2} min{C_s, d(I) − C(S1)} y_s + Σ_{i∈I} d_i x_{[T]∖(S1∪S2),i} >= d(I)`.
///
/// Periods are 1-based, items 0-based. Sets are kept sorted, so equality is
/// the canonical duplicate test.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CoveringCut {
    pub s1: BTreeSet<usize>,
    pub s2: BTreeSet<usize>,
    pub items: BTreeSet<usize>,
}

impl fmt::Display for CoveringCut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S1={:?} S2={:?} I={:?}", self.s1, self.s2, self.items)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CutError {
    #[error("cut {0}: S1 and S2 overlap")]
    Overlap(CoveringCut),
    #[error("cut {cut}: C(S1) = {cap} is not below d(I) = {demand}")]
    CapacityNotBelowDemand {
        cut: CoveringCut,
        cap: String,
        demand: String,
    },
    #[error("cut {0}: period out of range")]
    PeriodOutOfRange(CoveringCut),
    #[error("cut {0}: item out of range")]
    ItemOutOfRange(CoveringCut),
    #[error("cut {0} is already pooled")]
    Duplicate(CoveringCut),
    #[error("cut {cut} is not violated: lhs {lhs} >= rhs {rhs}")]
    NotViolated { cut: CoveringCut, lhs: String, rhs: String },
    #[error("no current solution to test the cut against")]
    NoSolution,
}

#[derive(Debug, thiserror::Error)]
pub enum MasterError {
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("master LP is {0:?}; the instance has no feasible schedule")]
    Status(LpStatus),
}

/// Column indices of `y_s` and `x_{s,i}` in the master LP.
#[derive(Debug, Clone)]
pub struct VarLayout {
    horizon: usize,
    x_start: Vec<usize>,
    num_vars: usize,
}

impl VarLayout {
    pub fn new(inst: &CmilsInstance) -> Self {
        let mut x_start = Vec::with_capacity(inst.num_items());
        let mut next = inst.horizon;
        for it in &inst.items {
            x_start.push(next);
            next += it.deadline;
        }
        VarLayout {
            horizon: inst.horizon,
            x_start,
            num_vars: next,
        }
    }

    pub fn y(&self, s: usize) -> usize {
        s - 1
    }

    pub fn x(&self, s: usize, i: usize) -> usize {
        self.x_start[i] + s - 1
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn solution(&self, inst: &CmilsInstance, values: &[Rational]) -> FractionalSolution {
        let y = values[..self.horizon].to_vec();
        let x = inst
            .items
            .iter()
            .enumerate()
            .map(|(i, it)| values[self.x_start[i]..self.x_start[i] + it.deadline].to_vec())
            .collect();
        FractionalSolution { x, y }
    }
}

/// The relaxation before any cuts: coverage equalities, the per-(s, i) and
/// per-s special cases of the covering family, unit boxes.
pub fn build_base_lp(inst: &CmilsInstance) -> LinearProgram {
    let layout = VarLayout::new(inst);
    let mut lp = LinearProgram::new(layout.num_vars());
    for s in 1..=inst.horizon {
        lp.objective[layout.y(s)] = inst.ordering_cost(s).clone();
    }
    for (i, it) in inst.items.iter().enumerate() {
        for s in 1..=it.deadline {
            lp.objective[layout.x(s, i)] = &it.demand * it.holding_at(s);
        }
    }
    for (i, it) in inst.items.iter().enumerate() {
        let coeffs = (1..=it.deadline).map(|s| (layout.x(s, i), int(1))).collect();
        lp.add_row(coeffs, Relation::Eq, int(1));
    }
    for (i, it) in inst.items.iter().enumerate() {
        for s in 1..=it.deadline {
            let eff = num::min(inst.capacity(s), &it.demand);
            lp.add_row(
                vec![(layout.y(s), eff), (layout.x(s, i), -it.demand.clone())],
                Relation::Ge,
                int(0),
            );
        }
    }
    let total = inst.total_demand();
    for s in 1..=inst.horizon {
        let mut coeffs = vec![(layout.y(s), num::min(inst.capacity(s), &total))];
        for (i, it) in inst.items.iter().enumerate() {
            if s <= it.deadline {
                coeffs.push((layout.x(s, i), -it.demand.clone()));
            }
        }
        lp.add_row(coeffs, Relation::Ge, int(0));
    }
    for b in lp.bounds.iter_mut() {
        *b = Bound::unit();
    }
    lp
}

fn check_cut(inst: &CmilsInstance, cut: &CoveringCut) -> Result<(), CutError> {
    let in_range = |s: &usize| (1..=inst.horizon).contains(s);
    if !cut.s1.iter().chain(&cut.s2).all(in_range) {
        return Err(CutError::PeriodOutOfRange(cut.clone()));
    }
    if !cut.items.iter().all(|&i| i < inst.num_items()) {
        return Err(CutError::ItemOutOfRange(cut.clone()));
    }
    if !cut.s1.is_disjoint(&cut.s2) {
        return Err(CutError::Overlap(cut.clone()));
    }
    let cap = inst.capacity_of(&cut.s1);
    let demand = inst.demand_of(&cut.items);
    if cap >= demand {
        return Err(CutError::CapacityNotBelowDemand {
            cut: cut.clone(),
            cap: Exact(&cap).to_string(),
            demand: Exact(&demand).to_string(),
        });
    }
    Ok(())
}

/// Left side of the cut at `(x, y)`; the cut is violated iff this is below `d(I)`.
pub fn cut_lhs(cut: &CoveringCut, sol: &FractionalSolution, inst: &CmilsInstance) -> Result<Rational, CutError> {
    check_cut(inst, cut)?;
    let c1 = inst.capacity_of(&cut.s1);
    let residual = inst.demand_of(&cut.items) - &c1;
    let mut lhs = c1;
    for &s in &cut.s2 {
        lhs += num::min(inst.capacity(s), &residual) * sol.y_at(s);
    }
    for &i in &cut.items {
        let it = &inst.items[i];
        for s in 1..=it.deadline {
            if !cut.s1.contains(&s) && !cut.s2.contains(&s) {
                lhs += &it.demand * sol.x_at(s, i);
            }
        }
    }
    Ok(lhs)
}

/// The cut as an LP row `Σ coeffs >= d(I) − C(S1)`.
fn cut_row(inst: &CmilsInstance, layout: &VarLayout, cut: &CoveringCut) -> (Vec<(usize, Rational)>, Rational) {
    let c1 = inst.capacity_of(&cut.s1);
    let residual = inst.demand_of(&cut.items) - &c1;
    let mut coeffs = Vec::new();
    for &s in &cut.s2 {
        coeffs.push((layout.y(s), num::min(inst.capacity(s), &residual)));
    }
    for &i in &cut.items {
        let it = &inst.items[i];
        for s in 1..=it.deadline {
            if !cut.s1.contains(&s) && !cut.s2.contains(&s) {
                coeffs.push((layout.x(s, i), it.demand.clone()));
            }
        }
    }
    (coeffs, residual)
}

/// Relaxation plus cut pool, with the most recent optimum.
#[derive(Debug, Clone)]
pub struct MasterState {
    pub instance: CmilsInstance,
    pub layout: VarLayout,
    pub cut_pool: Vec<CoveringCut>,
    pool_index: BTreeSet<CoveringCut>,
    pub current: Option<FractionalSolution>,
    pub lp_value: Option<Rational>,
    /// Number of completed LP solves.
    pub round: usize,
    pub lp_history: Vec<Rational>,
    lp: LinearProgram,
}

impl MasterState {
    pub fn new(inst: &CmilsInstance) -> Self {
        MasterState {
            instance: inst.clone(),
            layout: VarLayout::new(inst),
            cut_pool: Vec::new(),
            pool_index: BTreeSet::new(),
            current: None,
            lp_value: None,
            round: 0,
            lp_history: Vec::new(),
            lp: build_base_lp(inst),
        }
    }

    /// Current LP: base rows followed by one row per pooled cut.
    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    /// Pools a cut that the current solution strictly violates.
    pub fn add_cut(&mut self, cut: CoveringCut) -> Result<(), MasterError> {
        if self.pool_index.contains(&cut) {
            return Err(CutError::Duplicate(cut).into());
        }
        let sol = self.current.as_ref().ok_or(CutError::NoSolution)?;
        let lhs = cut_lhs(&cut, sol, &self.instance)?;
        let rhs = self.instance.demand_of(&cut.items);
        if lhs >= rhs {
            return Err(CutError::NotViolated {
                cut,
                lhs: Exact(&lhs).to_string(),
                rhs: Exact(&rhs).to_string(),
            }
            .into());
        }
        let (coeffs, rhs) = cut_row(&self.instance, &self.layout, &cut);
        self.lp.add_row(coeffs, Relation::Ge, rhs);
        self.pool_index.insert(cut.clone());
        self.cut_pool.push(cut);
        Ok(())
    }

    pub fn solve_master(&mut self) -> Result<&FractionalSolution, MasterError> {
        let sol = lp::solve_to_vertex(&self.lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(MasterError::Status(sol.status));
        }
        self.round += 1;
        self.lp_history.push(sol.objective_value.clone());
        self.lp_value = Some(sol.objective_value);
        self.current = Some(self.layout.solution(&self.instance, &sol.values));
        Ok(self.current.as_ref().expect("just set"))
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub max_rounds: usize,
    /// Pool every violated designated cut per round instead of the first.
    pub add_all_violated: bool,
    pub trace: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            max_rounds: 200,
            add_all_violated: false,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(with = "num::serde_rational")]
    pub lp_value: Rational,
    pub rounds: usize,
    pub num_cuts: usize,
    pub ordering_bound_ok: bool,
    pub holding_bound_ok: bool,
}

/// Everything a pipeline run produced, kept for verification.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub schedule: OrderSchedule,
    pub certificate: Certificate,
    pub lp_history: Vec<Rational>,
    pub cuts: Vec<CoveringCut>,
    /// Final LP optimum that was rounded.
    pub solution: FractionalSolution,
    pub payload: ReadyPayload,
    pub rounding: IntervalKcOutcome,
    pub xprime: Vec<Vec<Rational>>,
    pub xstar: Vec<Vec<Rational>>,
    pub trace: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Master(#[from] MasterError),
    #[error("no schedule after {rounds} LP rounds ({cuts} cuts pooled)")]
    RoundCap {
        rounds: usize,
        cuts: usize,
        state: Box<MasterState>,
    },
    #[error(transparent)]
    Invariant(#[from] InvariantViolation),
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Cut loop, rounding, and assignment, end to end.
pub fn run_pipeline(inst: &CmilsInstance, config: &PipelineConfig) -> Result<PipelineRun, PipelineError> {
    let violations = instance::validate(inst);
    if !violations.is_empty() {
        return Err(PipelineError::Invalid(violations));
    }
    let mut state = MasterState::new(inst);
    let mut trace = Vec::new();
    loop {
        if state.round >= config.max_rounds {
            return Err(PipelineError::RoundCap {
                rounds: state.round,
                cuts: state.cut_pool.len(),
                state: Box::new(state),
            });
        }
        let sol = state.solve_master()?.clone();
        if config.trace {
            trace.push(format!(
                "round {}: lp value {}",
                state.round,
                Exact(state.lp_value.as_ref().expect("solved"))
            ));
        }
        match separation::try_round(inst, &sol, config.add_all_violated)? {
            RoundOutcome::Cuts(cuts) => {
                for cut in cuts {
                    if config.trace {
                        trace.push(format!("round {}: cut {cut}", state.round));
                    }
                    state.add_cut(cut)?;
                }
            }
            RoundOutcome::Ready(payload) => {
                return finish(inst, state, sol, payload, trace, config.trace);
            }
        }
    }
}

fn finish(
    inst: &CmilsInstance,
    state: MasterState,
    sol: FractionalSolution,
    payload: ReadyPayload,
    mut trace: Vec<String>,
    tracing: bool,
) -> Result<PipelineRun, PipelineError> {
    let ikc = IntervalKcInstance::from_cmils(inst, payload.requirements.clone());
    let rounding = interval_kc::solve_interval_kc(&ikc, &payload.yhat, &payload.splus, &payload.rtilde)?;
    if tracing {
        for ev in &rounding.laminar.trace {
            trace.push(format!("rounding {ev}"));
        }
        trace.push(format!("orders {:?}", rounding.orders));
    }
    let xprime = assignment::build_xprime(inst, &sol.x)?;
    let xstar = assignment::solve_assignment(inst, &rounding.orders, &xprime)?;
    let schedule = OrderSchedule::from_shares(inst, rounding.orders.clone(), &xstar)?;

    let lp_ordering = sol
        .y
        .iter()
        .zip(&inst.ordering_costs)
        .fold(Rational::zero(), |acc, (y, k)| acc + y * k);
    let lp_holding = instance::hcost(inst, &sol.x);
    let ordering_bound_ok = schedule.costs.ordering <= int(10) * &lp_ordering;
    let holding_bound_ok = schedule.costs.holding <= frac(5, 2) * &lp_holding;
    let lp_value = state.lp_value.clone().expect("solved at least once");
    let certificate = Certificate {
        lp_value,
        rounds: state.round,
        num_cuts: state.cut_pool.len(),
        ordering_bound_ok,
        holding_bound_ok,
    };
    Ok(PipelineRun {
        schedule,
        certificate,
        lp_history: state.lp_history,
        cuts: state.cut_pool,
        solution: sol,
        payload,
        rounding,
        xprime,
        xstar,
        trace,
    })
}
