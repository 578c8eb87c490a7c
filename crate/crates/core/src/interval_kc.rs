//! Interval knapsack covering: reduction to a laminar family of intervals
//! and rounding through the laminar solver.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::instance::CmilsInstance;
use crate::interval::{all_intervals, Interval};
use crate::laminar_kc::{self, LaminarKcInstance, LaminarOutcome};
use crate::num::{self, int, Exact, Rational};
use crate::separation::scaled_disjunction_holds;
use crate::InvariantViolation;

/// Knapsacks `1..=T` with capacities, costs, and a covering requirement per
/// interval (absent intervals require nothing).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalKcInstance {
    pub horizon: usize,
    pub capacities: Vec<Rational>,
    pub costs: Vec<Rational>,
    pub requirements: BTreeMap<Interval, Rational>,
}

impl IntervalKcInstance {
    pub fn from_cmils(inst: &CmilsInstance, requirements: BTreeMap<Interval, Rational>) -> Self {
        IntervalKcInstance {
            horizon: inst.horizon,
            capacities: inst.capacities.clone(),
            costs: inst.ordering_costs.clone(),
            requirements,
        }
    }

    pub fn requirement(&self, iv: &Interval) -> Rational {
        self.requirements.get(iv).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn capacity_within(&self, set: &BTreeSet<usize>, iv: &Interval) -> Rational {
        num::sum(iv.periods().filter(|s| set.contains(s)).map(|s| &self.capacities[s - 1]))
    }

    pub fn cost_of(&self, set: &BTreeSet<usize>) -> Rational {
        num::sum(set.iter().map(|s| &self.costs[s - 1]))
    }

    /// Every interval requirement met by `set`.
    pub fn is_covered_by(&self, set: &BTreeSet<usize>) -> bool {
        self.requirements
            .iter()
            .all(|(iv, r)| &self.capacity_within(set, iv) >= r)
    }
}

/// Largest `W >= 0` with `Σ_{(a,b]∖S⁺} min{C_s, W} y_s >= 2W` or
/// `Σ_{(a,b]∖S⁺ : C_s >= W} y_s >= 1`. The supremum is attained: the first
/// condition is a closed interval `[0, W1]` of a concave function, the
/// second is right-closed at capacity values.
pub fn compute_rprime(iv: Interval, y: &[Rational], splus: &BTreeSet<usize>, capacities: &[Rational]) -> Rational {
    let mut knaps: Vec<(Rational, Rational)> = iv
        .periods()
        .filter(|s| !splus.contains(s) && !y[s - 1].is_zero())
        .map(|s| (capacities[s - 1].clone(), y[s - 1].clone()))
        .collect();
    knaps.sort();

    // W1: walk the breakpoints of f(W) = Σ min{C_s, W} y_s − 2W.
    let two = int(2);
    let mut slope = num::sum(knaps.iter().map(|(_, y)| y)) - &two;
    let mut w = Rational::zero();
    let mut f = Rational::zero();
    let mut w1 = None;
    for (c, yv) in &knaps {
        if c > &w {
            let next = &f + &slope * (c - &w);
            if next < Rational::zero() {
                // Root inside (w, c); the slope is negative here.
                w1 = Some(&w + &f / (-&slope));
                break;
            }
            w = c.clone();
            f = next;
        }
        slope -= yv;
    }
    let w1 = w1.unwrap_or_else(|| {
        // Past the last breakpoint f decreases with slope −2.
        &w + &f / &two
    });

    // W2: largest capacity whose at-least-as-large knapsacks carry y-mass 1.
    let mut w2 = Rational::zero();
    let mut mass = Rational::zero();
    for (c, yv) in knaps.iter().rev() {
        mass += yv;
        if mass >= Rational::one() {
            w2 = c.clone();
            break;
        }
    }
    num::max(&w1, &w2)
}

/// Full binary laminar tree over unit leaves, rooted at `(0, T]`, with the
/// reduced requirement of each member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaminarFamily {
    pub horizon: usize,
    /// Preorder (parent before children, left child first).
    pub members: Vec<Interval>,
    pub children: BTreeMap<Interval, (Interval, Interval)>,
    pub rprime_tilde: BTreeMap<Interval, Rational>,
}

impl LaminarFamily {
    pub fn is_laminar(&self) -> bool {
        self.members
            .iter()
            .enumerate()
            .all(|(k, a)| self.members[k + 1..].iter().all(|b| a.is_laminar_with(b)))
    }

    /// Root `(0, T]`, `2T − 1` members, unit leaves, binary splits.
    pub fn is_full_binary(&self) -> bool {
        if self.horizon == 0 || self.members.first() != Some(&Interval::new(0, self.horizon)) {
            return false;
        }
        if self.members.len() != 2 * self.horizon - 1 {
            return false;
        }
        self.members.iter().all(|m| match self.children.get(m) {
            Some((l, r)) => l.a == m.a && l.b == r.a && r.b == m.b,
            None => m.len() == 1,
        })
    }

    /// Indented tree with `R̃′` annotations.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        if self.horizon > 0 {
            self.dump_node(Interval::new(0, self.horizon), 0, &mut out);
        }
        out
    }

    fn dump_node(&self, iv: Interval, depth: usize, out: &mut String) {
        let _ = writeln!(out, "{}{} R~'={}", "  ".repeat(depth), iv, Exact(&self.rprime_tilde[&iv]));
        if let Some((l, r)) = self.children.get(&iv) {
            self.dump_node(*l, depth + 1, out);
            self.dump_node(*r, depth + 1, out);
        }
    }
}

/// Recursive split of `(0, T]`: each non-unit `(a, b]` is cut at the
/// smallest `c` maximising `min{R̃′_{a,c}, R̃′_{c,b}}`.
pub fn construct_laminar_family(
    y: &[Rational],
    splus: &BTreeSet<usize>,
    capacities: &[Rational],
    horizon: usize,
) -> LaminarFamily {
    let mut memo: HashMap<Interval, Rational> = HashMap::new();
    let mut rp = |iv: Interval| -> Rational {
        memo.entry(iv)
            .or_insert_with(|| compute_rprime(iv, y, splus, capacities))
            .clone()
    };
    let mut family = LaminarFamily {
        horizon,
        members: Vec::new(),
        children: BTreeMap::new(),
        rprime_tilde: BTreeMap::new(),
    };
    if horizon == 0 {
        return family;
    }
    let mut stack = vec![Interval::new(0, horizon)];
    while let Some(iv) = stack.pop() {
        family.members.push(iv);
        family.rprime_tilde.insert(iv, rp(iv));
        if iv.len() > 1 {
            let mut best: Option<(Rational, usize)> = None;
            for c in iv.a + 1..iv.b {
                let score = num::min(&rp(Interval::new(iv.a, c)), &rp(Interval::new(c, iv.b)));
                if best.as_ref().is_none_or(|(b, _)| &score > b) {
                    best = Some((score, c));
                }
            }
            let c = best.expect("non-unit interval has a split").1;
            let (l, r) = (Interval::new(iv.a, c), Interval::new(c, iv.b));
            family.children.insert(iv, (l, r));
            stack.push(r);
            stack.push(l);
        }
    }
    family
}

/// Every interval with positive residual requirement contains a family
/// member whose reduced requirement is at least as large.
pub fn family_captures_requirements(family: &LaminarFamily, rtilde: &BTreeMap<Interval, Rational>) -> bool {
    rtilde.iter().filter(|(_, r)| !r.is_zero()).all(|(iv, r)| {
        family
            .members
            .iter()
            .any(|m| m.is_subset_of(iv) && &family.rprime_tilde[m] >= r)
    })
}

#[derive(Debug, Clone)]
pub struct IntervalKcOutcome {
    pub orders: BTreeSet<usize>,
    pub family: LaminarFamily,
    pub laminar_instance: LaminarKcInstance,
    pub laminar: LaminarOutcome,
}

/// Rounds `ŷ` to an order set `S* ⊇ S⁺` covering every interval at cost at
/// most `Σ ŷ_s K_s`. Requires, for each interval with `R̃ > 0`, the scaled
/// disjunction (`>= 10 R̃` capped mass or `>= 6` large mass).
pub fn solve_interval_kc(
    ikc: &IntervalKcInstance,
    yhat: &[Rational],
    splus: &BTreeSet<usize>,
    rtilde: &BTreeMap<Interval, Rational>,
) -> Result<IntervalKcOutcome, InvariantViolation> {
    let t = ikc.horizon;
    ensure!(yhat.len() == t, "order vector has {} entries for horizon {t}", yhat.len());
    let ones: BTreeSet<usize> = (1..=t).filter(|&s| yhat[s - 1].is_one()).collect();
    ensure!(&ones == splus, "S+ {splus:?} differs from the unit coordinates {ones:?}");
    for iv in all_intervals(t) {
        let expected = num::pos(ikc.requirement(&iv) - ikc.capacity_within(splus, &iv));
        let given = rtilde.get(&iv).cloned().unwrap_or_else(Rational::zero);
        ensure!(given == expected, "residual for {iv} is {} but should be {}", Exact(&given), Exact(&expected));
        if !given.is_zero() {
            ensure!(
                scaled_disjunction_holds(iv, &given, yhat, splus, &ikc.capacities),
                "interval {iv} fails the rounding hypothesis"
            );
        }
    }

    let family = construct_laminar_family(yhat, splus, &ikc.capacities, t);
    let mut requirements = BTreeMap::new();
    let mut member_rtilde = BTreeMap::new();
    for m in &family.members {
        let rt = family.rprime_tilde[m].clone();
        let r = &rt + ikc.capacity_within(splus, m);
        if !r.is_zero() {
            requirements.insert(*m, r);
            member_rtilde.insert(*m, rt);
        }
    }
    let lkc = LaminarKcInstance {
        horizon: t,
        capacities: ikc.capacities.clone(),
        costs: ikc.costs.clone(),
        members: family.members.clone(),
        requirements,
    };
    for (m, rt) in &member_rtilde {
        if !rt.is_zero() {
            ensure!(
                laminar_kc::hypothesis_holds(*m, rt, yhat, splus, &ikc.capacities),
                "member {m} fails the laminar hypothesis"
            );
        }
    }
    let laminar = laminar_kc::solve(&lkc, yhat, splus, &member_rtilde)?;
    let orders = laminar.orders.clone();

    for iv in all_intervals(t) {
        let r = ikc.requirement(&iv);
        let got = ikc.capacity_within(&orders, &iv);
        ensure!(got >= r, "interval {iv} covered {} < {}", Exact(&got), Exact(&r));
    }
    let budget = yhat
        .iter()
        .zip(&ikc.costs)
        .fold(Rational::zero(), |acc, (y, k)| acc + y * k);
    let spent = ikc.cost_of(&orders);
    ensure!(spent <= budget, "rounded cost {} exceeds {}", Exact(&spent), Exact(&budget));
    Ok(IntervalKcOutcome {
        orders,
        family,
        laminar_instance: lkc,
        laminar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::frac;

    #[test]
    fn rprime_examples() {
        let none = BTreeSet::new();
        let caps = vec![int(5), int(5)];
        assert_eq!(compute_rprime(Interval::new(0, 2), &[int(0), int(0)], &none, &caps), int(0));
        assert_eq!(
            compute_rprime(Interval::new(0, 2), &[frac(1, 2), frac(1, 2)], &none, &caps),
            int(5)
        );
        assert_eq!(compute_rprime(Interval::new(0, 1), &[frac(1, 2)], &none, &[int(10)]), int(0));
    }

    #[test]
    fn rprime_from_capped_mass() {
        let caps = vec![int(4); 3];
        let y = vec![frac(9, 10); 3];
        // 2.7 min{4, W} − 2W >= 0 up to W = 5.4; W2 = 4.
        assert_eq!(compute_rprime(Interval::new(0, 3), &y, &BTreeSet::new(), &caps), frac(27, 5));
    }

    #[test]
    fn family_shapes() {
        let none = BTreeSet::new();
        let f1 = construct_laminar_family(&[frac(1, 2)], &none, &[int(1)], 1);
        assert_eq!(f1.members, vec![Interval::new(0, 1)]);
        let f2 = construct_laminar_family(&vec![frac(1, 2); 2], &none, &vec![int(1); 2], 2);
        assert_eq!(f2.children[&Interval::new(0, 2)], (Interval::new(0, 1), Interval::new(1, 2)));
        let y: Vec<Rational> = (1..=6).map(|k| frac(k, 7)).collect();
        let caps: Vec<Rational> = (1..=6).map(|k| int(7 - k)).collect();
        let f6 = construct_laminar_family(&y, &none, &caps, 6);
        assert!(f6.is_laminar() && f6.is_full_binary());
        assert!(f6.dump().starts_with("(0, 6] R~'="));
    }

    #[test]
    fn nothing_to_cover_returns_splus() {
        let ikc = IntervalKcInstance {
            horizon: 3,
            capacities: vec![int(2); 3],
            costs: vec![int(1); 3],
            requirements: BTreeMap::new(),
        };
        let yhat = vec![int(1), frac(1, 3), int(0)];
        let splus = BTreeSet::from([1]);
        let out = solve_interval_kc(&ikc, &yhat, &splus, &BTreeMap::new()).unwrap();
        assert_eq!(out.orders, splus);
        assert!(family_captures_requirements(&out.family, &BTreeMap::new()));
    }
}
