use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use potplan_core::feature::{
    classify_features, delta, delta_ind, evaluate_potential, PotentialFunction, WeightFunction,
};
use potplan_core::generator::{random_feature_set, random_tnf_task, GeneratorConfig};
use potplan_core::task::Task;
use potplan_core::transition::build_transition_system;

fn task(seed: u64, vars: usize) -> Task {
    random_tnf_task(
        &GeneratorConfig {
            vars,
            ops: 5,
            max_op_vars: 3,
            ..GeneratorConfig::default()
        },
        seed,
    )
}

fn random_weights(len: usize, seed: u64) -> WeightFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    WeightFunction((0..len).map(|_| rng.gen_range(-5..=5) as f64).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partition_is_complete_and_disjoint(seed in 0u64..10_000, vars in 2usize..5) {
        let task = task(seed, vars);
        let fs = random_feature_set(&task, 3, 10, seed);
        for o in &task.operators {
            let p = classify_features(&fs, o);
            let mut all: Vec<usize> = p.irrelevant.iter().chain(&p.context_independent).chain(&p.context_dependent).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..fs.len()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn delta_matches_classification(seed in 0u64..10_000, vars in 2usize..5) {
        let task = task(seed, vars);
        let fs = random_feature_set(&task, 3, 10, seed);
        let ts = build_transition_system(&task, 100_000).unwrap();
        for (oi, o) in task.operators.iter().enumerate() {
            let p = classify_features(&fs, o);
            for t in ts.transitions.iter().filter(|t| t.op == oi) {
                let s = ts.state(t.source);
                for &i in &p.irrelevant {
                    prop_assert_eq!(delta(o, fs.get(i), &s).unwrap(), 0);
                }
                for &i in &p.context_independent {
                    prop_assert_eq!(delta(o, fs.get(i), &s).unwrap(), delta_ind(o, fs.get(i)).unwrap());
                }
            }
            for &i in p.irrelevant.iter().chain(&p.context_dependent) {
                prop_assert!(delta_ind(o, fs.get(i)).is_err());
            }
        }
    }

    #[test]
    fn potential_difference_is_weighted_delta(seed in 0u64..10_000, vars in 2usize..5) {
        let task = task(seed, vars);
        let fs = random_feature_set(&task, 3, 10, seed);
        let w = random_weights(fs.len(), seed);
        let pot = PotentialFunction::new(&task, &fs, &w);
        let ts = build_transition_system(&task, 100_000).unwrap();
        for s in ts.states() {
            prop_assert_eq!(pot.evaluate(&s), evaluate_potential(&fs, &w, &s));
        }
        for t in &ts.transitions {
            let (s, s2) = (ts.state(t.source), ts.state(t.target));
            let o = &task.operators[t.op];
            let expected: f64 = fs.iter().map(|(i, f)| w.0[i] * delta(o, f, &s).unwrap() as f64).sum();
            prop_assert_eq!(pot.evaluate(&s) - pot.evaluate(&s2), expected);
        }
    }
}
