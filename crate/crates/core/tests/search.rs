mod common;

use proptest::prelude::*;

use potplan_core::feature::generate_features;
use potplan_core::lp::SimplexSolver;
use potplan_core::potential::Direct2dLp;
use potplan_core::search::{astar, validate_on, Counterexample};
use potplan_core::task::successor;
use potplan_core::transition::{build_transition_system, goal_distances};

use common::{close, potential, suite_task};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn astar_is_optimal_with_potentials(seed in 0u64..10_000) {
        let task = suite_task(seed);
        let ts = build_transition_system(&task, 100_000).unwrap();
        let h_star = goal_distances(&ts)[ts.initial];
        let solver = SimplexSolver::default();
        let mut heuristics: Vec<Box<dyn Fn(&potplan_core::task::State) -> f64>> = vec![Box::new(|_| 0.0)];
        for dim in [1, 2] {
            let fs = generate_features(&task, dim, None).unwrap();
            let w = Direct2dLp::build(&task, &fs)
                .unwrap()
                .into_potential_lp()
                .solve_for_states(&fs, std::slice::from_ref(&task.initial_state), &solver)
                .unwrap()
                .weights;
            heuristics.push(Box::new(potential(&task, &fs, &w)));
        }
        for h in &heuristics {
            prop_assert!(validate_on(&ts, h.as_ref()).all_hold());
            let r = astar(&task, h.as_ref()).unwrap();
            prop_assert!(close(r.cost, h_star, 1e-9));
            let plan = r.plan.unwrap();
            let mut s = task.initial_state.clone();
            let mut cost = 0.0;
            for op in plan {
                s = successor(&s, &task.operators[op]).unwrap();
                cost += task.operators[op].cost as f64;
            }
            prop_assert!(task.is_goal(&s));
            prop_assert_eq!(cost, r.cost);
            prop_assert!(r.expansions_before_last_f_layer <= r.expansions);
        }
    }

    #[test]
    fn counterexamples_are_genuine(seed in 0u64..10_000, scale in 1.5f64..4.0) {
        let task = suite_task(seed);
        let ts = build_transition_system(&task, 100_000).unwrap();
        let h_star = goal_distances(&ts);
        // an inflated perfect heuristic breaks admissibility and usually consistency
        let h = |s: &potplan_core::task::State| {
            let d = h_star[ts.index_of(s)];
            if d.is_finite() { scale * d } else { 0.0 }
        };
        let report = validate_on(&ts, &h);
        prop_assert!(!report.admissible);
        match report.counterexample {
            Some(Counterexample::Transition { state, op }) => {
                prop_assert!(!report.consistent);
                let next = task.operators[op].apply_unchecked(&state);
                prop_assert!(h(&state) > task.operators[op].cost as f64 + h(&next));
            }
            Some(Counterexample::GoalState(s)) => prop_assert!(h(&s) > 0.0),
            Some(Counterexample::Overestimate(s)) => {
                prop_assert!(report.consistent && report.goal_aware);
                prop_assert!(h(&s) > h_star[ts.index_of(&s)]);
            }
            None => prop_assert!(false, "no counterexample"),
        }
    }
}
