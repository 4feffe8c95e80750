#![allow(dead_code)]

use potplan_core::feature::{FeatureSet, PotentialFunction, WeightFunction};
use potplan_core::generator::{random_tnf_task, GeneratorConfig};
use potplan_core::task::{Operator, PartialAssignment, State, Task, Variable};

/// Two binary variables, one operator flipping each from 0 to 1 at cost 1.
pub fn toy1() -> Task {
    let binary = |name: &str| Variable::new(name, vec!["0".into(), "1".into()]);
    Task::new(
        vec![binary("X"), binary("Y")],
        vec![
            Operator::new(
                "oX",
                PartialAssignment::from_pairs(&[(0, 0)]),
                PartialAssignment::from_pairs(&[(0, 1)]),
                1,
            ),
            Operator::new(
                "oY",
                PartialAssignment::from_pairs(&[(1, 0)]),
                PartialAssignment::from_pairs(&[(1, 1)]),
                1,
            ),
        ],
        State(vec![0, 0]),
        PartialAssignment::from_pairs(&[(0, 1), (1, 1)]),
    )
    .unwrap()
}

/// At most 4 variables with domains up to 3 and at most 6 operators.
pub fn suite_config(seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        vars: 2 + (seed % 3) as usize,
        max_domain: 3,
        ops: 3 + (seed % 4) as usize,
        max_op_vars: 1 + (seed % 3) as usize,
        ..GeneratorConfig::default()
    }
}

pub fn suite_task(seed: u64) -> Task {
    random_tnf_task(&suite_config(seed), seed)
}

pub fn potential(task: &Task, fs: &FeatureSet, w: &WeightFunction) -> impl Fn(&State) -> f64 {
    let pot = PotentialFunction::new(task, fs, w);
    move |s: &State| pot.evaluate(s)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
