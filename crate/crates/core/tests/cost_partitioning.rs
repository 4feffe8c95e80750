mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use potplan_core::cost_partitioning::{
    all_projections, build_ocp_lp, build_tcp_lp, features_of_abstractions, partitioned_heuristic,
    shift_normalize, validate_partition,
};
use potplan_core::lp::{LpSolver, SimplexSolver};
use potplan_core::potential::Direct2dLp;
use potplan_core::search::validate_on;
use potplan_core::task::State;
use potplan_core::transition::{build_transition_system, goal_distances};

use common::{close, potential, suite_task};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tcp_equals_potential_optimum(seed in 0u64..10_000) {
        let task = suite_task(seed);
        let ts = build_transition_system(&task, 100_000).unwrap();
        let h_star = goal_distances(&ts);
        let abstractions = all_projections(&ts, 2).unwrap();
        let (fs, offsets) = features_of_abstractions(&abstractions).unwrap();
        let solver = SimplexSolver::default();

        let mut candidates: Vec<usize> = (0..ts.num_states()).filter(|&s| h_star[s].is_finite()).collect();
        candidates.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut states: Vec<State> = vec![task.initial_state.clone()];
        states.extend(candidates.iter().take(3).map(|&s| ts.state(s)));

        for s in &states {
            let tcp_lp = build_tcp_lp(&ts, &abstractions, s);
            let tcp_sol = solver.solve(&tcp_lp.model).unwrap();
            let tcp = tcp_sol.objective_value.unwrap();
            let ocp = solver.solve(&build_ocp_lp(&ts, &abstractions, s).model).unwrap().objective_value.unwrap();
            let pot = Direct2dLp::build(&task, &fs)
                .unwrap()
                .into_potential_lp()
                .solve_for_states(&fs, std::slice::from_ref(s), &solver)
                .unwrap();
            prop_assert!(close(pot.value, tcp, 1e-6), "potential {} vs TCP {}", pot.value, tcp);
            prop_assert!(tcp >= ocp - 1e-6);
            prop_assert!(tcp <= h_star[ts.index_of(s)] + 1e-6);

            // the extracted transition costs form a partition whose summed
            // abstract distances are admissible and reach the LP value
            let costs = tcp_lp.cost_functions(&ts, &tcp_sol);
            prop_assert!(validate_partition(&ts, &costs).valid);
            let h = partitioned_heuristic(&abstractions, &costs, s);
            prop_assert!(h.is_finite());
            prop_assert!(h <= h_star[ts.index_of(s)] + 1e-6);
            prop_assert!(h >= tcp - 1e-6);

            // shifting each abstraction's weights to zero at the goal keeps
            // the potential feasible and does not lower φ(s)
            let goal = ts.goals[0];
            let shifted = shift_normalize(&abstractions, &offsets, &pot.weights, goal);
            let before = potential(&task, &fs, &pot.weights);
            let after = potential(&task, &fs, &shifted);
            let report = validate_on(&ts, &after);
            prop_assert!(report.goal_aware && report.consistent);
            prop_assert!(after(s) >= before(s) - 1e-6);
            prop_assert!(close(after(&ts.state(goal)), 0.0, 1e-6));
        }
    }
}
