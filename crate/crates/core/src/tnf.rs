//! Transformation into transition normal form (TNF): every operator mentions
//! the same variables in precondition and effect, and the goal is a full state.

use crate::task::{Operator, PartialAssignment, State, Task};

/// Name given to the fresh value appended to each domain.
pub const UNDEFINED_VALUE: &str = "<undefined>";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TnfCertificate {
    /// Per variable, the index of the appended value.
    pub fresh_value_index: Vec<usize>,
    /// Ids of the zero-cost forgetting operators `⟨V=v → V=u⟩`.
    pub added_operators: Vec<usize>,
}

pub fn is_tnf(task: &Task) -> bool {
    task.goal.len() == task.num_vars()
        && task
            .operators
            .iter()
            .all(|o| o.pre.vars().eq(o.eff.vars()))
}

/// Appends a fresh value `u` to every domain. Effects on variables without a
/// precondition get `pre[V]=u`, preconditions without an effect get
/// `eff[V]=pre[V]`, and unassigned goal variables get `goal[V]=u`. Forgetting
/// operators are added for the variables that need to reach `u`.
pub fn to_tnf(task: &Task) -> (Task, TnfCertificate) {
    let n = task.num_vars();
    let fresh: Vec<usize> = task.variables.iter().map(|v| v.domain_size()).collect();

    let mut variables = task.variables.clone();
    for var in &mut variables {
        var.value_names.push(UNDEFINED_VALUE.to_string());
    }

    let mut needs_forget = vec![false; n];
    let mut operators = Vec::with_capacity(task.operators.len());
    for op in &task.operators {
        let mut pre = op.pre.clone();
        let mut eff = op.eff.clone();
        for f in op.eff.facts() {
            if !op.pre.contains_var(f.var) {
                pre.set(f.var, fresh[f.var]);
                needs_forget[f.var] = true;
            }
        }
        for f in op.pre.facts() {
            if !op.eff.contains_var(f.var) {
                eff.set(f.var, f.value);
            }
        }
        operators.push(Operator::new(op.name.clone(), pre, eff, op.cost));
    }

    let mut goal = task.goal.clone();
    for (var, need) in needs_forget.iter_mut().enumerate() {
        if !task.goal.contains_var(var) {
            goal.set(var, fresh[var]);
            *need = true;
        }
    }

    let mut added_operators = Vec::new();
    for var in 0..n {
        if !needs_forget[var] {
            continue;
        }
        for value in 0..fresh[var] {
            added_operators.push(operators.len());
            operators.push(Operator::new(
                format!("forget {} {}", task.variables[var].name, task.variables[var].value_names[value]),
                PartialAssignment::from_pairs(&[(var, value)]),
                PartialAssignment::from_pairs(&[(var, fresh[var])]),
                0,
            ));
        }
    }

    let result = Task {
        variables,
        operators,
        initial_state: State(task.initial_state.values().to_vec()),
        goal,
        use_metric: task.use_metric,
    };
    debug_assert!(result.validate().is_ok());
    (
        result,
        TnfCertificate {
            fresh_value_index: fresh,
            added_operators,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::fixtures::toy1;
    use crate::task::Variable;
    use crate::transition::{build_transition_system, goal_distances};

    fn h_star_init(task: &Task) -> f64 {
        let ts = build_transition_system(task, 1_000_000).unwrap();
        goal_distances(&ts)[ts.initial]
    }

    #[test]
    fn toy1_is_tnf() {
        assert!(is_tnf(&toy1()));
    }

    #[test]
    fn partial_goal_is_not_tnf() {
        let mut task = toy1();
        task.goal = PartialAssignment::from_pairs(&[(0, 1)]);
        assert!(!is_tnf(&task));
    }

    #[test]
    fn empty_precondition_is_not_tnf() {
        let mut task = toy1();
        task.operators[0].pre = PartialAssignment::empty();
        assert!(!is_tnf(&task));
    }

    #[test]
    fn toy1_transform_preserves_cost() {
        let (tnf, cert) = to_tnf(&toy1());
        assert!(is_tnf(&tnf));
        assert_eq!(cert.fresh_value_index, vec![2, 2]);
        assert!(cert.added_operators.is_empty());
        assert_eq!(tnf.variables[0].domain_size(), 3);
        assert_eq!(h_star_init(&tnf), 2.0);
    }

    #[test]
    fn partial_goal_gets_undefined_value() {
        let mut task = toy1();
        task.goal = PartialAssignment::from_pairs(&[(0, 1)]);
        let (tnf, cert) = to_tnf(&task);
        assert!(is_tnf(&tnf));
        assert_eq!(tnf.goal, PartialAssignment::from_pairs(&[(0, 1), (1, 2)]));
        assert_eq!(cert.added_operators.len(), 2);
        for &id in &cert.added_operators {
            let op = &tnf.operators[id];
            assert_eq!(op.cost, 0);
            assert_eq!(op.vars().len(), 1);
        }
        assert_eq!(h_star_init(&task), 1.0);
        assert_eq!(h_star_init(&tnf), 1.0);
    }

    #[test]
    fn effect_without_precondition_requires_undefined() {
        let task = Task::new(
            vec![Variable::with_domain("X", 2), Variable::with_domain("Y", 2)],
            vec![Operator::new(
                "o",
                PartialAssignment::from_pairs(&[(0, 0)]),
                PartialAssignment::from_pairs(&[(0, 1), (1, 1)]),
                1,
            )],
            State(vec![0, 0]),
            PartialAssignment::from_pairs(&[(0, 1), (1, 1)]),
        )
        .unwrap();
        let (tnf, _) = to_tnf(&task);
        assert_eq!(tnf.operators[0].pre, PartialAssignment::from_pairs(&[(0, 0), (1, 2)]));
        assert_eq!(tnf.operators[0].eff, PartialAssignment::from_pairs(&[(0, 1), (1, 1)]));
        assert_eq!(h_star_init(&task), 1.0);
        assert_eq!(h_star_init(&tnf), 1.0);
    }

    #[test]
    fn prevail_is_copied_into_effect() {
        let task = Task::new(
            vec![Variable::with_domain("X", 2), Variable::with_domain("Y", 2)],
            vec![Operator::new(
                "o",
                PartialAssignment::from_pairs(&[(0, 0), (1, 0)]),
                PartialAssignment::from_pairs(&[(0, 1)]),
                1,
            )],
            State(vec![0, 0]),
            PartialAssignment::from_pairs(&[(0, 1), (1, 0)]),
        )
        .unwrap();
        let (tnf, cert) = to_tnf(&task);
        assert_eq!(tnf.operators[0].eff, PartialAssignment::from_pairs(&[(0, 1), (1, 0)]));
        assert!(cert.added_operators.is_empty());
    }
}
