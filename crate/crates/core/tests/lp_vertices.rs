mod common;

use lotforge::lp::{solve_to_vertex, verify_vertex, Bound, LinearProgram, LpStatus, Relation};
use lotforge::num::{frac, int, Rational};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn empty_system_lands_on_a_vertex() {
    let lp = LinearProgram::new(1);
    let sol = solve_to_vertex(&lp).unwrap();
    assert!(sol.values[0] == int(0) || sol.values[0] == int(1));
    assert!(verify_vertex(&lp, &sol));
}

#[test]
fn perturbed_optimum_is_rejected() {
    let mut lp = LinearProgram::new(2);
    lp.objective = vec![int(1), int(2)];
    lp.add_row(vec![(0, int(1)), (1, int(1))], Relation::Ge, int(1));
    let sol = solve_to_vertex(&lp).unwrap();
    assert_eq!(sol.values, vec![int(1), int(0)]);
    let mut off = sol.clone();
    off.values[0] = frac(1, 2);
    assert!(!verify_vertex(&lp, &off));
    let mut mid = sol;
    mid.values = vec![frac(1, 2), frac(1, 2)];
    assert!(!verify_vertex(&lp, &mid));
}

#[test]
fn unbounded_ray_is_reported() {
    let mut lp = LinearProgram::new(2);
    lp.bounds = vec![Bound::non_negative(); 2];
    lp.objective = vec![int(-1), int(0)];
    lp.add_row(vec![(0, int(1)), (1, int(-1))], Relation::Le, int(3));
    assert_eq!(solve_to_vertex(&lp).unwrap().status, LpStatus::Unbounded);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn four_variable_programs_match_enumeration(seed in 0u64..1_000_000, m in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lp = common::random_lp(&mut rng, 4, m);
        let sol = solve_to_vertex(&lp).unwrap();
        match common::optimum_by_enumeration(&lp) {
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert_eq!(&sol.objective_value, &best);
                prop_assert!(verify_vertex(&lp, &sol));
            }
        }
    }

    #[test]
    fn solutions_with_open_bounds_are_vertices(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut lp = common::random_lp(&mut rng, 5, 3);
        lp.bounds[0] = Bound::non_negative();
        lp.bounds[2] = Bound { lo: int(-2), hi: None };
        let sol = solve_to_vertex(&lp).unwrap();
        if sol.status == LpStatus::Optimal {
            prop_assert!(verify_vertex(&lp, &sol));
            prop_assert!(lp.rows.iter().all(|r| r.is_satisfied(&sol.values)));
            let obj: Rational = lp.objective_value(&sol.values);
            prop_assert_eq!(obj, sol.objective_value);
        }
    }
}
