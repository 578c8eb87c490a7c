//! Exact rational linear programming.
//!
//! A dense-tableau, bounded-variable, two-phase primal simplex with Bland's
//! least-index rule. Every solution it reports as optimal is a basic feasible
//! solution, i.e. a vertex of the feasible polytope, and carries the sets of
//! tight rows and tight bounds so callers can re-check the vertex property
//! with [`verify_vertex`].

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use crate::num::{Exact, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    /// Sparse coefficients `(variable, value)`; a variable may appear at most once.
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Row {
    pub fn activity(&self, values: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .fold(Rational::zero(), |acc, (j, a)| acc + a * &values[*j])
    }

    pub fn is_satisfied(&self, values: &[Rational]) -> bool {
        let act = self.activity(values);
        match self.relation {
            Relation::Ge => act >= self.rhs,
            Relation::Le => act <= self.rhs,
            Relation::Eq => act == self.rhs,
        }
    }
}

/// Variable box `[lo, hi]`; `hi = None` means unbounded above.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bound {
    pub lo: Rational,
    pub hi: Option<Rational>,
}

impl Bound {
    pub fn unit() -> Self {
        Bound {
            lo: Rational::zero(),
            hi: Some(Rational::one()),
        }
    }

    pub fn fixed(v: Rational) -> Self {
        Bound {
            lo: v.clone(),
            hi: Some(v),
        }
    }

    pub fn non_negative() -> Self {
        Bound {
            lo: Rational::zero(),
            hi: None,
        }
    }
}

/// Minimization LP over `num_vars` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub rows: Vec<Row>,
    pub bounds: Vec<Bound>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("row {row} references variable {var} but the program has {num_vars} variables")]
    BadIndex { row: usize, var: usize, num_vars: usize },
    #[error("variable {var} has empty bounds")]
    EmptyBounds { var: usize },
    #[error("objective has {found} coefficients, expected {expected}")]
    ObjectiveLength { expected: usize, found: usize },
    #[error("bounds have {found} entries, expected {expected}")]
    BoundsLength { expected: usize, found: usize },
}

impl LinearProgram {
    /// Zero objective, no rows, every variable in `[0, 1]`.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            rows: Vec::new(),
            bounds: vec![Bound::unit(); num_vars],
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) -> usize {
        self.rows.push(Row { coeffs, relation, rhs });
        self.rows.len() - 1
    }

    pub fn check(&self) -> Result<(), LpError> {
        if self.objective.len() != self.num_vars {
            return Err(LpError::ObjectiveLength {
                expected: self.num_vars,
                found: self.objective.len(),
            });
        }
        if self.bounds.len() != self.num_vars {
            return Err(LpError::BoundsLength {
                expected: self.num_vars,
                found: self.bounds.len(),
            });
        }
        for (r, row) in self.rows.iter().enumerate() {
            for (j, _) in &row.coeffs {
                if *j >= self.num_vars {
                    return Err(LpError::BadIndex {
                        row: r,
                        var: *j,
                        num_vars: self.num_vars,
                    });
                }
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if b.hi.as_ref().is_some_and(|hi| hi < &b.lo) {
                return Err(LpError::EmptyBounds { var: j });
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, values: &[Rational]) -> Rational {
        self.objective
            .iter()
            .zip(values)
            .fold(Rational::zero(), |acc, (c, v)| acc + c * v)
    }

    /// Plain-text inequality dump, one constraint per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let term = |c: &Rational, j: usize| format!("{} x{}", Exact(c), j);
        let obj: Vec<String> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| term(c, j))
            .collect();
        let _ = writeln!(out, "min {}", if obj.is_empty() { "0".into() } else { obj.join(" + ") });
        for (r, row) in self.rows.iter().enumerate() {
            let lhs: Vec<String> = row.coeffs.iter().map(|(j, c)| term(c, *j)).collect();
            let rel = match row.relation {
                Relation::Ge => ">=",
                Relation::Le => "<=",
                Relation::Eq => "=",
            };
            let _ = writeln!(out, "r{r}: {} {rel} {}", lhs.join(" + "), Exact(&row.rhs));
        }
        for (j, b) in self.bounds.iter().enumerate() {
            match &b.hi {
                Some(hi) => {
                    let _ = writeln!(out, "{} <= x{j} <= {}", Exact(&b.lo), Exact(hi));
                }
                None => {
                    let _ = writeln!(out, "{} <= x{j}", Exact(&b.lo));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Empty unless `status == Optimal`.
    pub values: Vec<Rational>,
    pub objective_value: Rational,
    pub tight_rows: BTreeSet<usize>,
    pub at_bound: BTreeSet<usize>,
    pub pivots: usize,
}

impl LpSolution {
    fn without_point(status: LpStatus, pivots: usize) -> Self {
        LpSolution {
            status,
            values: Vec::new(),
            objective_value: Rational::zero(),
            tight_rows: BTreeSet::new(),
            at_bound: BTreeSet::new(),
            pivots,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Status {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau {
    /// `B^{-1} A`, one dense row per constraint.
    rows: Vec<Vec<Rational>>,
    /// Reduced costs of the current phase.
    reduced: Vec<Rational>,
    basis: Vec<usize>,
    status: Vec<Status>,
    value: Vec<Rational>,
    lo: Vec<Rational>,
    hi: Vec<Option<Rational>>,
    /// Columns that may never enter again (artificials after phase one).
    banned: Vec<bool>,
    pivots: usize,
}

enum StepOutcome {
    Optimal,
    Unbounded,
    Moved,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.lo.len()
    }

    fn reset_costs(&mut self, cost: &[Rational]) {
        let mut d = cost.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, a) in row.iter().enumerate() {
                if !a.is_zero() {
                    d[j] -= cb * a;
                }
            }
        }
        self.reduced = d;
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let inv = self.rows[p][q].recip();
        for a in self.rows[p].iter_mut() {
            if !a.is_zero() {
                *a *= &inv;
            }
        }
        let support: Vec<usize> = (0..self.rows[p].len())
            .filter(|&j| !self.rows[p][j].is_zero())
            .collect();
        let pivot_row = std::mem::take(&mut self.rows[p]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == p || row[q].is_zero() {
                continue;
            }
            let f = row[q].clone();
            for &j in &support {
                row[j] -= &f * &pivot_row[j];
            }
        }
        if !self.reduced[q].is_zero() {
            let f = self.reduced[q].clone();
            for &j in &support {
                self.reduced[j] -= &f * &pivot_row[j];
            }
        }
        self.rows[p] = pivot_row;
        self.basis[p] = q;
        self.pivots += 1;
    }

    /// One Bland step: least-index improving column, least-index blocking variable.
    fn step(&mut self) -> StepOutcome {
        let entering = (0..self.ncols()).find(|&j| {
            if self.banned[j] || self.status[j] == Status::Basic {
                return false;
            }
            if self.hi[j].as_ref() == Some(&self.lo[j]) {
                return false;
            }
            match self.status[j] {
                Status::AtLower => self.reduced[j].is_negative(),
                Status::AtUpper => self.reduced[j].is_positive(),
                Status::Basic => false,
            }
        });
        let Some(q) = entering else {
            return StepOutcome::Optimal;
        };
        let increasing = self.status[q] == Status::AtLower;

        // (step length, blocking variable, row or None for a bound flip, leaves at upper)
        let mut best: Option<(Rational, usize, Option<usize>, bool)> = None;
        let mut consider = |cand: (Rational, usize, Option<usize>, bool)| match &best {
            Some((t, v, _, _)) if (&cand.0, cand.1) >= (t, *v) => {}
            _ => best = Some(cand),
        };
        if let Some(hi) = &self.hi[q] {
            consider((hi - &self.lo[q], q, None, false));
        }
        for (i, row) in self.rows.iter().enumerate() {
            let alpha = &row[q];
            if alpha.is_zero() {
                continue;
            }
            let k = self.basis[i];
            // d x_k / d t = -alpha when increasing x_q, +alpha when decreasing.
            let rate = if increasing { -alpha } else { alpha.clone() };
            if rate.is_negative() {
                let t = (&self.value[k] - &self.lo[k]) / (-&rate);
                consider((t, k, Some(i), false));
            } else if let Some(hi) = &self.hi[k] {
                let t = (hi - &self.value[k]) / &rate;
                consider((t, k, Some(i), true));
            }
        }
        let Some((t, _, row, to_upper)) = best else {
            return StepOutcome::Unbounded;
        };

        if !t.is_zero() {
            let delta = if increasing { t.clone() } else { -t.clone() };
            for (i, r) in self.rows.iter().enumerate() {
                if !r[q].is_zero() {
                    let k = self.basis[i];
                    self.value[k] -= &delta * &r[q];
                }
            }
            self.value[q] += &delta;
        }
        match row {
            None => {
                self.status[q] = if increasing {
                    Status::AtUpper
                } else {
                    Status::AtLower
                };
                self.value[q] = match self.status[q] {
                    Status::AtUpper => self.hi[q].clone().expect("flip needs finite upper bound"),
                    _ => self.lo[q].clone(),
                };
            }
            Some(p) => {
                let k = self.basis[p];
                if to_upper {
                    self.status[k] = Status::AtUpper;
                    self.value[k] = self.hi[k].clone().expect("blocking upper bound");
                } else {
                    self.status[k] = Status::AtLower;
                    self.value[k] = self.lo[k].clone();
                }
                self.status[q] = Status::Basic;
                self.pivot(p, q);
            }
        }
        StepOutcome::Moved
    }

    fn run(&mut self) -> StepOutcome {
        loop {
            match self.step() {
                StepOutcome::Moved => continue,
                other => return other,
            }
        }
    }
}

/// Solves `lp` to an optimal vertex, or reports infeasibility/unboundedness.
pub fn solve_to_vertex(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;
    let n = lp.num_vars;
    let m = lp.rows.len();

    // Column layout: structurals, one slack per inequality row, artificials.
    let mut lo: Vec<Rational> = lp.bounds.iter().map(|b| b.lo.clone()).collect();
    let mut hi: Vec<Option<Rational>> = lp.bounds.iter().map(|b| b.hi.clone()).collect();
    let mut dense: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut slack_of_row: Vec<Option<(usize, Rational)>> = Vec::with_capacity(m);
    for row in &lp.rows {
        let mut d = vec![Rational::zero(); n];
        for (j, a) in &row.coeffs {
            d[*j] += a;
        }
        dense.push(d);
        match row.relation {
            Relation::Eq => slack_of_row.push(None),
            rel => {
                let col = lo.len();
                lo.push(Rational::zero());
                hi.push(None);
                let sign = if rel == Relation::Le {
                    Rational::one()
                } else {
                    -Rational::one()
                };
                slack_of_row.push(Some((col, sign)));
            }
        }
    }
    let first_artificial = lo.len();

    let mut value: Vec<Rational> = lo.clone();
    let mut status = vec![Status::AtLower; lo.len()];
    let mut basis = vec![0usize; m];
    let mut artificial_rows: Vec<(usize, Rational)> = Vec::new();
    for (i, row) in dense.iter().enumerate() {
        let act = row
            .iter()
            .zip(&value)
            .fold(Rational::zero(), |acc, (a, v)| acc + a * v);
        let residual = &lp.rows[i].rhs - act;
        match &slack_of_row[i] {
            Some((col, sign)) if (sign * &residual) >= Rational::zero() => {
                value[*col] = sign * &residual;
                status[*col] = Status::Basic;
                basis[i] = *col;
            }
            _ => {
                let sign = if residual.is_negative() {
                    -Rational::one()
                } else {
                    Rational::one()
                };
                artificial_rows.push((i, sign));
            }
        }
    }
    for (i, sign) in &artificial_rows {
        let col = lo.len();
        lo.push(Rational::zero());
        hi.push(None);
        status.push(Status::Basic);
        let residual = &lp.rows[*i].rhs
            - dense[*i]
                .iter()
                .zip(&value)
                .fold(Rational::zero(), |acc, (a, v)| acc + a * v);
        value.push(sign * residual);
        basis[*i] = col;
    }
    let ncols = lo.len();

    // Tableau rows scaled so that each basic column is +1.
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(m);
    for (i, d) in dense.into_iter().enumerate() {
        let mut full = d;
        full.resize(ncols, Rational::zero());
        if let Some((col, sign)) = &slack_of_row[i] {
            full[*col] = sign.clone();
        }
        let b = basis[i];
        if b >= first_artificial {
            let sign = &artificial_rows.iter().find(|(r, _)| *r == i).unwrap().1;
            full[b] = sign.clone();
        }
        let scale = full[b].clone();
        if !scale.is_one() {
            for a in full.iter_mut() {
                if !a.is_zero() {
                    *a /= &scale;
                }
            }
        }
        rows.push(full);
    }

    let mut tab = Tableau {
        rows,
        reduced: Vec::new(),
        basis,
        status,
        value,
        lo,
        hi,
        banned: vec![false; ncols],
        pivots: 0,
    };

    // Phase one: minimise the sum of artificials.
    if ncols > first_artificial {
        let mut cost = vec![Rational::zero(); ncols];
        for c in cost.iter_mut().skip(first_artificial) {
            *c = Rational::one();
        }
        tab.reset_costs(&cost);
        tab.run();
        let infeasibility = tab.value[first_artificial..]
            .iter()
            .fold(Rational::zero(), |acc, v| acc + v);
        if infeasibility.is_positive() {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, tab.pivots));
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        let mut p = 0;
        while p < tab.rows.len() {
            if tab.basis[p] < first_artificial {
                p += 1;
                continue;
            }
            let replacement =
                (0..first_artificial).find(|&j| tab.status[j] != Status::Basic && !tab.rows[p][j].is_zero());
            match replacement {
                Some(q) => {
                    let leaving = tab.basis[p];
                    tab.status[leaving] = Status::AtLower;
                    tab.status[q] = Status::Basic;
                    tab.pivot(p, q);
                    p += 1;
                }
                None => {
                    // Redundant row.
                    tab.rows.remove(p);
                    tab.basis.remove(p);
                }
            }
        }
        for j in first_artificial..ncols {
            tab.banned[j] = true;
        }
    }

    let mut cost = lp.objective.clone();
    cost.resize(ncols, Rational::zero());
    tab.reset_costs(&cost);
    if let StepOutcome::Unbounded = tab.run() {
        return Ok(LpSolution::without_point(LpStatus::Unbounded, tab.pivots));
    }

    let values: Vec<Rational> = tab.value[..n].to_vec();
    let objective_value = lp.objective_value(&values);
    let (tight_rows, at_bound) = tight_sets(lp, &values);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values,
        objective_value,
        tight_rows,
        at_bound,
        pivots: tab.pivots,
    })
}

fn tight_sets(lp: &LinearProgram, values: &[Rational]) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let tight_rows = lp
        .rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.activity(values) == r.rhs)
        .map(|(i, _)| i)
        .collect();
    let at_bound = lp
        .bounds
        .iter()
        .enumerate()
        .filter(|(j, b)| values[*j] == b.lo || b.hi.as_ref() == Some(&values[*j]))
        .map(|(j, _)| j)
        .collect();
    (tight_rows, at_bound)
}

/// Rank of a dense rational matrix by exact Gaussian elimination.
pub fn rank(mut m: Vec<Vec<Rational>>) -> usize {
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        let pivot: Vec<Rational> = m[r].iter().map(|v| v * &inv).collect();
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for (k, pv) in pivot.iter().enumerate().skip(c) {
                    if !pv.is_zero() {
                        m[i][k] -= &f * pv;
                    }
                }
            }
        }
        m[r] = pivot;
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// True iff `sol` is feasible for `lp` and its tight constraints (rows and
/// bounds, recomputed here) have full column rank.
pub fn verify_vertex(lp: &LinearProgram, sol: &LpSolution) -> bool {
    if sol.status != LpStatus::Optimal || sol.values.len() != lp.num_vars {
        return false;
    }
    let x = &sol.values;
    for (j, b) in lp.bounds.iter().enumerate() {
        if x[j] < b.lo || b.hi.as_ref().is_some_and(|hi| &x[j] > hi) {
            return false;
        }
    }
    if !lp.rows.iter().all(|r| r.is_satisfied(x)) {
        return false;
    }
    let (tight_rows, at_bound) = tight_sets(lp, x);
    let mut system = Vec::new();
    for i in tight_rows {
        let mut d = vec![Rational::zero(); lp.num_vars];
        for (j, a) in &lp.rows[i].coeffs {
            d[*j] += a;
        }
        system.push(d);
    }
    for j in at_bound {
        let mut d = vec![Rational::zero(); lp.num_vars];
        d[j] = Rational::one();
        system.push(d);
    }
    lp.num_vars == 0 || rank(system) == lp.num_vars
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{frac, int};

    #[test]
    fn single_lower_bound_row() {
        let mut lp = LinearProgram::new(1);
        lp.bounds[0] = Bound { lo: int(0), hi: Some(int(2)) };
        lp.objective[0] = int(1);
        lp.add_row(vec![(0, int(1))], Relation::Ge, int(1));
        let sol = solve_to_vertex(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.values, vec![int(1)]);
        assert_eq!(sol.objective_value, int(1));
        assert!(verify_vertex(&lp, &sol));
    }

    #[test]
    fn zero_objective_returns_a_vertex() {
        let lp = LinearProgram::new(1);
        let sol = solve_to_vertex(&lp).unwrap();
        assert!(sol.values[0] == int(0) || sol.values[0] == int(1));
        assert!(verify_vertex(&lp, &sol));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![(0, int(1))], Relation::Ge, int(2));
        assert_eq!(solve_to_vertex(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new(2);
        lp.bounds = vec![Bound::non_negative(), Bound::non_negative()];
        lp.objective = vec![int(-1), int(0)];
        lp.add_row(vec![(0, int(1)), (1, int(-1))], Relation::Le, int(1));
        assert_eq!(solve_to_vertex(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_redundant_rows() {
        // x + y = 1 twice, minimise x - y  ->  (0, 1)
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![int(1), int(-1)];
        lp.add_row(vec![(0, int(1)), (1, int(1))], Relation::Eq, int(1));
        lp.add_row(vec![(0, int(2)), (1, int(2))], Relation::Eq, int(2));
        let sol = solve_to_vertex(&lp).unwrap();
        assert_eq!(sol.values, vec![int(0), int(1)]);
        assert!(verify_vertex(&lp, &sol));
    }

    #[test]
    fn midpoint_and_perturbation_rejected() {
        // x + y <= 1 in the unit box; vertices (1,0) and (0,1), midpoint is not a vertex.
        let mut lp = LinearProgram::new(2);
        lp.add_row(vec![(0, int(1)), (1, int(1))], Relation::Le, int(1));
        let mid = LpSolution {
            status: LpStatus::Optimal,
            values: vec![frac(1, 2), frac(1, 2)],
            objective_value: int(0),
            tight_rows: BTreeSet::new(),
            at_bound: BTreeSet::new(),
            pivots: 0,
        };
        assert!(!verify_vertex(&lp, &mid));
        let off = LpSolution {
            values: vec![int(1), frac(1, 10)],
            ..mid
        };
        assert!(!verify_vertex(&lp, &off));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling-prone structure; Bland's rule must terminate.
        let mut lp = LinearProgram::new(4);
        lp.bounds = vec![Bound::non_negative(); 4];
        lp.objective = vec![frac(-3, 4), int(150), frac(-1, 50), int(6)];
        lp.add_row(
            vec![(0, frac(1, 4)), (1, int(-60)), (2, frac(-1, 25)), (3, int(9))],
            Relation::Le,
            int(0),
        );
        lp.add_row(
            vec![(0, frac(1, 2)), (1, int(-90)), (2, frac(-1, 50)), (3, int(3))],
            Relation::Le,
            int(0),
        );
        lp.add_row(vec![(2, int(1))], Relation::Le, int(1));
        let sol = solve_to_vertex(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.objective_value, frac(-1, 20));
        assert!(verify_vertex(&lp, &sol));
    }

    #[test]
    fn fixed_variables_stay_fixed() {
        let mut lp = LinearProgram::new(3);
        lp.bounds[1] = Bound::fixed(int(1));
        lp.objective = vec![int(1), int(-5), int(1)];
        lp.add_row(vec![(0, int(1)), (1, int(1)), (2, int(1))], Relation::Ge, int(2));
        let sol = solve_to_vertex(&lp).unwrap();
        assert_eq!(sol.values[1], int(1));
        assert_eq!(sol.objective_value, int(-4));
        assert!(verify_vertex(&lp, &sol));
    }

    #[test]
    fn rejects_bad_index() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![(3, int(1))], Relation::Ge, int(0));
        assert!(matches!(solve_to_vertex(&lp), Err(LpError::BadIndex { .. })));
    }
}
