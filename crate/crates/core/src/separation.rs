//! Rounding-as-separation: turn an LP optimum into interval requirements and
//! either find a violated covering cut among one designated candidate per
//! interval, or certify the scaled order vector for interval rounding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::instance::{prefix_sum, CmilsInstance, FractionalSolution};
use crate::interval::{all_intervals, Interval};
use crate::master::{cut_lhs, CoveringCut};
use crate::num::{self, frac, int, Rational};
use crate::InvariantViolation;

/// `R_{a,b} = Σ_{i: r_i∈(a,b]} max{1 − (5/2) x_{[a],i}, 0} d_i` for every interval.
pub fn compute_requirements(inst: &CmilsInstance, x: &[Vec<Rational>]) -> BTreeMap<Interval, Rational> {
    let five_halves = frac(5, 2);
    all_intervals(inst.horizon)
        .map(|iv| {
            let r = inst
                .items
                .iter()
                .zip(x)
                .filter(|(it, _)| iv.contains(it.deadline))
                .fold(Rational::zero(), |acc, (it, row)| {
                    let left = Rational::one() - &five_halves * prefix_sum(row, iv.a);
                    acc + num::pos(left) * &it.demand
                });
            (iv, r)
        })
        .collect()
}

/// `ŷ_s = min{10 y_s, 1}` and `S⁺ = {s : y_s >= 1/10}` (1-based periods).
pub fn scale_y(y: &[Rational]) -> (Vec<Rational>, BTreeSet<usize>) {
    let ten = int(10);
    let one = Rational::one();
    let yhat: Vec<Rational> = y.iter().map(|v| num::min(&(&ten * v), &one)).collect();
    let splus = yhat
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_one())
        .map(|(k, _)| k + 1)
        .collect();
    (yhat, splus)
}

/// `R̃_{a,b} = max{R_{a,b} − C((a,b] ∩ S⁺), 0}`.
pub fn residual_requirements(
    requirements: &BTreeMap<Interval, Rational>,
    splus: &BTreeSet<usize>,
    capacities: &[Rational],
) -> BTreeMap<Interval, Rational> {
    requirements
        .iter()
        .map(|(iv, r)| {
            let secured = num::sum(iv.periods().filter(|s| splus.contains(s)).map(|s| &capacities[s - 1]));
            (*iv, num::pos(r - secured))
        })
        .collect()
}

/// Certified input for interval rounding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadyPayload {
    pub yhat: Vec<Rational>,
    pub splus: BTreeSet<usize>,
    pub requirements: BTreeMap<Interval, Rational>,
    pub rtilde: BTreeMap<Interval, Rational>,
}

impl ReadyPayload {
    /// `a,b,R,Rtilde` rows with exact rationals.
    pub fn requirements_csv(&self) -> String {
        let mut out = String::from("a,b,R,Rtilde\n");
        for (iv, r) in &self.requirements {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                iv.a,
                iv.b,
                num::format_rational(r),
                num::format_rational(&self.rtilde[iv])
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundOutcome {
    /// Strictly violated cuts, in interval scan order.
    Cuts(Vec<CoveringCut>),
    Ready(ReadyPayload),
}

/// The designated candidate for `(a, b]`: `S1 = (a,b] ∩ S⁺`, `S2 = (a,b] ∖ S⁺`,
/// `I = {i : r_i ∈ (a,b], x_{[a],i} < 2/5}`.
pub fn designated_cut(
    inst: &CmilsInstance,
    x: &[Vec<Rational>],
    splus: &BTreeSet<usize>,
    iv: Interval,
) -> CoveringCut {
    let two_fifths = frac(2, 5);
    let (s1, s2): (BTreeSet<usize>, BTreeSet<usize>) = iv.periods().partition(|s| splus.contains(s));
    let items = inst
        .items
        .iter()
        .enumerate()
        .filter(|(i, it)| iv.contains(it.deadline) && prefix_sum(&x[*i], iv.a) < two_fifths)
        .map(|(i, _)| i)
        .collect();
    CoveringCut { s1, s2, items }
}

/// With `g = R − C(S1) > 0`: `Σ_{S2} min{C_s, g} y_s >= g` or
/// `Σ_{S2 : C_s >= g} y_s >= 3/5`.
pub fn transfer_holds(
    s2: &BTreeSet<usize>,
    gap: &Rational,
    y: &[Rational],
    capacities: &[Rational],
) -> bool {
    let capped = s2
        .iter()
        .fold(Rational::zero(), |acc, &s| acc + num::min(&capacities[s - 1], gap) * &y[s - 1]);
    if &capped >= gap {
        return true;
    }
    let big = num::sum(s2.iter().filter(|&&s| &capacities[s - 1] >= gap).map(|&s| &y[s - 1]));
    big >= frac(3, 5)
}

/// For `R̃ > 0`: `Σ_{(a,b]∖S⁺} min{C_s, R̃} ŷ_s >= 10 R̃` or
/// `Σ_{(a,b]∖S⁺ : C_s >= R̃} ŷ_s >= 6`.
pub fn scaled_disjunction_holds(
    iv: Interval,
    rtilde: &Rational,
    yhat: &[Rational],
    splus: &BTreeSet<usize>,
    capacities: &[Rational],
) -> bool {
    let free: Vec<usize> = iv.periods().filter(|s| !splus.contains(s)).collect();
    let capped = free
        .iter()
        .fold(Rational::zero(), |acc, &s| acc + num::min(&capacities[s - 1], rtilde) * &yhat[s - 1]);
    if capped >= int(10) * rtilde {
        return true;
    }
    let big = num::sum(free.iter().filter(|&&s| &capacities[s - 1] >= rtilde).map(|&s| &yhat[s - 1]));
    big >= int(6)
}

/// Checks the designated cut of every interval with positive residual
/// requirement, in ascending `(a, b)` order. Returns the first violated cut
/// (all of them with `add_all`), or the certified payload when none is
/// violated.
pub fn try_round(
    inst: &CmilsInstance,
    sol: &FractionalSolution,
    add_all: bool,
) -> Result<RoundOutcome, InvariantViolation> {
    let requirements = compute_requirements(inst, &sol.x);
    let (yhat, splus) = scale_y(&sol.y);
    let rtilde = residual_requirements(&requirements, &splus, &inst.capacities);
    let mut cuts = Vec::new();
    for iv in all_intervals(inst.horizon) {
        let rt = &rtilde[&iv];
        if rt.is_zero() {
            continue;
        }
        let r = &requirements[&iv];
        let cut = designated_cut(inst, &sol.x, &splus, iv);
        let c1 = inst.capacity_of(&cut.s1);
        if &c1 >= r {
            continue;
        }
        let lhs = cut_lhs(&cut, sol, inst).map_err(|e| InvariantViolation(e.to_string()))?;
        if lhs < inst.demand_of(&cut.items) {
            cuts.push(cut);
            if !add_all {
                break;
            }
            continue;
        }
        let gap = r - &c1;
        ensure!(
            transfer_holds(&cut.s2, &gap, &sol.y, &inst.capacities),
            "interval {iv}: designated cut holds but neither transfer inequality does"
        );
        ensure!(
            scaled_disjunction_holds(iv, rt, &yhat, &splus, &inst.capacities),
            "interval {iv}: scaled order vector fails the rounding hypothesis"
        );
    }
    if cuts.is_empty() {
        Ok(RoundOutcome::Ready(ReadyPayload {
            yhat,
            splus,
            requirements,
            rtilde,
        }))
    } else {
        Ok(RoundOutcome::Cuts(cuts))
    }
}
