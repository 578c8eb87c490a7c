//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use lotforge::instance::{gen_random, CmilsInstance, GenParams, Item};
use lotforge::interval::Interval;
use lotforge::lp::{Bound, LinearProgram, Relation};
use lotforge::num::{frac, int, Rational};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solves the square system `a x = b` by Gauss-Jordan elimination; `None` if singular.
pub fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = Rational::one() / &a[col][col];
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        b[col] *= &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..n {
                    let d = &f * &a[col][c];
                    a[r][c] -= d;
                }
                let d = &f * &b[col];
                b[r] -= d;
            }
        }
    }
    Some(b)
}

fn feasible(lp: &LinearProgram, x: &[Rational]) -> bool {
    lp.bounds
        .iter()
        .zip(x)
        .all(|(bd, v)| v >= &bd.lo && bd.hi.as_ref().is_none_or(|hi| v <= hi))
        && lp.rows.iter().all(|r| r.is_satisfied(x))
}

/// Inverse of a square matrix by Gauss-Jordan elimination; `None` if singular.
pub fn invert(a: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let cols: Vec<Vec<Rational>> = (0..n)
        .map(|c| {
            let e: Vec<Rational> = (0..n).map(|r| if r == c { Rational::one() } else { Rational::zero() }).collect();
            solve_square(a.to_vec(), e)
        })
        .collect::<Option<_>>()?;
    Some((0..n).map(|r| (0..n).map(|c| cols[c][r].clone()).collect()).collect())
}

/// Every vertex of a bounded LP: choose `k` free variables and `k` rows
/// whose square submatrix is nonsingular, put every other variable at one
/// of its bounds, and solve the rows as equalities. Requires finite upper
/// bounds.
pub fn enumerate_vertices(lp: &LinearProgram) -> Vec<Vec<Rational>> {
    let n = lp.num_vars;
    let m = lp.rows.len();
    let dense: Vec<Vec<Rational>> = lp
        .rows
        .iter()
        .map(|r| {
            let mut d = vec![Rational::zero(); n];
            for (j, a) in &r.coeffs {
                d[*j] += a;
            }
            d
        })
        .collect();
    let hi: Vec<Rational> = lp.bounds.iter().map(|b| b.hi.clone().expect("finite upper bounds")).collect();
    let mut found: BTreeSet<Vec<Rational>> = BTreeSet::new();
    for k in 0..=m.min(n) {
        for free in subsets(n, k) {
            let fixed: Vec<usize> = (0..n).filter(|j| !free.contains(j)).collect();
            for rows in subsets(m, k) {
                let sub: Vec<Vec<Rational>> = rows.iter().map(|&r| free.iter().map(|&j| dense[r][j].clone()).collect()).collect();
                let Some(inv) = invert(&sub) else { continue };
                for mask in 0u32..(1u32 << fixed.len()) {
                    let mut x = vec![Rational::zero(); n];
                    for (bit, &j) in fixed.iter().enumerate() {
                        x[j] = if mask >> bit & 1 == 1 { hi[j].clone() } else { lp.bounds[j].lo.clone() };
                    }
                    let rhs: Vec<Rational> = rows
                        .iter()
                        .map(|&r| fixed.iter().fold(lp.rows[r].rhs.clone(), |acc, &j| acc - &dense[r][j] * &x[j]))
                        .collect();
                    for (p, &j) in free.iter().enumerate() {
                        x[j] = inv[p].iter().zip(&rhs).fold(Rational::zero(), |acc, (a, b)| acc + a * b);
                    }
                    if feasible(lp, &x) {
                        found.insert(x);
                    }
                }
            }
        }
    }
    found.into_iter().collect()
}

fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..(1u32 << m))
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| (0..m).filter(|r| mask >> r & 1 == 1).collect())
        .collect()
}

/// Minimum objective over all vertices, `None` if infeasible.
pub fn optimum_by_enumeration(lp: &LinearProgram) -> Option<Rational> {
    enumerate_vertices(lp).iter().map(|x| lp.objective_value(x)).min()
}

/// Random LP with `n` variables in finite boxes and `m` mixed rows, small
/// integer data.
pub fn random_lp(rng: &mut impl Rng, n: usize, m: usize) -> LinearProgram {
    let mut lp = LinearProgram::new(n);
    lp.objective = (0..n).map(|_| int(rng.gen_range(-5..=9))).collect();
    lp.bounds = (0..n)
        .map(|_| {
            let lo = int(rng.gen_range(0..=1));
            let hi = &lo + int(rng.gen_range(0..=3));
            Bound { lo, hi: Some(hi) }
        })
        .collect();
    // Rows are mostly built around a random point of the box so that the
    // program is usually feasible; one in eight gets an arbitrary right side.
    let point: Vec<Rational> = lp
        .bounds
        .iter()
        .map(|b| {
            let hi = b.hi.clone().expect("finite");
            &b.lo + (hi - &b.lo) * frac(rng.gen_range(0..=4), 4)
        })
        .collect();
    for _ in 0..m {
        let mut coeffs: Vec<(usize, Rational)> = Vec::new();
        for j in 0..n {
            let a = rng.gen_range(-3..=4);
            if a != 0 && rng.gen_bool(0.7) {
                coeffs.push((j, int(a)));
            }
        }
        let relation = match rng.gen_range(0..6) {
            0 => Relation::Eq,
            1 | 2 => Relation::Le,
            _ => Relation::Ge,
        };
        let activity = coeffs.iter().fold(Rational::zero(), |acc, (j, a)| acc + a * &point[*j]);
        let rhs = if rng.gen_bool(0.125) {
            int(rng.gen_range(-2..=6))
        } else {
            match relation {
                Relation::Eq => activity,
                Relation::Le => activity + int(rng.gen_range(0..=2)),
                Relation::Ge => activity - int(rng.gen_range(0..=2)),
            }
        };
        lp.add_row(coeffs, relation, rhs);
    }
    lp
}

/// Largest `W` satisfying either hypothesis condition, by evaluating both
/// conditions directly at every candidate: `0`, each capacity, and each
/// root of the capped-mass line between consecutive capacities.
pub fn rprime_by_scan(iv: Interval, y: &[Rational], splus: &BTreeSet<usize>, caps: &[Rational]) -> Rational {
    let free: Vec<usize> = iv.periods().filter(|s| !splus.contains(s)).collect();
    let capped = |w: &Rational| {
        free.iter().fold(Rational::zero(), |acc, &s| {
            let c = &caps[s - 1];
            acc + if c < w { c.clone() } else { w.clone() } * &y[s - 1]
        })
    };
    let big = |w: &Rational| free.iter().filter(|&&s| &caps[s - 1] >= w).fold(Rational::zero(), |acc, &s| acc + &y[s - 1]);
    let holds = |w: &Rational| capped(w) >= int(2) * w || big(w) >= Rational::one();

    let mut grid: Vec<Rational> = vec![Rational::zero()];
    grid.extend(free.iter().map(|&s| caps[s - 1].clone()));
    grid.sort();
    grid.dedup();
    let mut candidates = grid.clone();
    // On [g_k, g_{k+1}] (and beyond the last point) the capped mass is
    // `fixed + w * slope`; its crossing with 2w is a candidate.
    let mut bounds = grid.clone();
    bounds.push(grid.last().unwrap() + int(1));
    for pair in bounds.windows(2) {
        let lo = &pair[0];
        let slope = free.iter().filter(|&&s| &caps[s - 1] > lo).fold(Rational::zero(), |acc, &s| acc + &y[s - 1]);
        let fixed = free.iter().filter(|&&s| &caps[s - 1] <= lo).fold(Rational::zero(), |acc, &s| acc + &caps[s - 1] * &y[s - 1]);
        let denom = int(2) - &slope;
        if denom > Rational::zero() {
            let root = fixed / denom;
            if &root >= lo {
                candidates.push(root);
            }
        }
    }
    let best = candidates.into_iter().filter(|w| holds(w)).max().unwrap();
    // Nothing above the best candidate may satisfy either condition.
    let probe = &best + Rational::new(1.into(), 997.into());
    assert!(!holds(&probe), "scan missed a larger root above {best}");
    best
}

/// Shape of the random CMILS instance used for `seed`: `T` in `3..=8`, `N` in `1..=6`.
pub fn cmils_for_seed(seed: u64) -> CmilsInstance {
    let t = 3 + (seed % 6) as usize;
    let n = 1 + ((seed / 6) % 6) as usize;
    gen_random(seed, &GenParams::new(t, n)).expect("valid parameters")
}

/// `blocks` copies of the two-period gap pattern side by side: a cheap
/// period just short of an item's demand followed by a dearer one that can
/// hold it alone. The plain relaxation keeps the second order tiny, so the
/// cut loop has to work.
pub fn gap_chain(seed: u64, blocks: usize) -> CmilsInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ordering_costs = Vec::new();
    let mut capacities = Vec::new();
    let mut items = Vec::new();
    for b in 0..blocks {
        let d = rng.gen_range(10..60);
        ordering_costs.push(int(rng.gen_range(0..3)));
        ordering_costs.push(int(rng.gen_range(5..40)));
        capacities.push(int(d - rng.gen_range(1..4)));
        capacities.push(int(d + rng.gen_range(0..20)));
        let deadline = 2 * b + 2;
        let rate = rng.gen_range(0..2);
        let mut holding = vec![int(0); deadline];
        for s in (1..deadline).rev() {
            holding[s - 1] = &holding[s] + int(rate);
        }
        items.push(Item {
            demand: int(d),
            deadline,
            holding,
        });
    }
    CmilsInstance {
        horizon: 2 * blocks,
        ordering_costs,
        capacities,
        items,
    }
}
