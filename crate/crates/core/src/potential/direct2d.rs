//! The compact LP for feature sets of dimension at most 2.
//!
//! Per operator `o`, consistency over all states collapses to
//! `Δ^ind_o + Σ_V z^o_V ≤ cost(o)` with `z^o_V ≥ Σ_{f = f_o ∧ ⟨V,v⟩} w(f)·Δ_o(f_o)`
//! for every value `v` of each variable `V` outside `vars(o)`.

use std::collections::BTreeMap;

use super::{add_weight_unknowns, potential_expression, PotentialLp, PotentialSolution};
use crate::error::{Error, Result};
use crate::feature::{classify_features, delta_ind, Feature, FeatureSet};
use crate::lp::{LinearExpression, LpModel, LpSolver, Relation, Row};
use crate::task::{State, Task};
use crate::tnf::is_tnf;

#[derive(Clone, Debug)]
pub struct Direct2dLp {
    pub model: LpModel,
    /// Feature index → unknown id.
    pub weight_vars: Vec<usize>,
    /// `(operator, variable)` → unknown id of `z^o_V`.
    pub z_vars: BTreeMap<(usize, usize), usize>,
}

fn check_input(task: &Task, fs: &FeatureSet) -> Result<()> {
    if !is_tnf(task) {
        return Err(Error::NotTnf);
    }
    fs.check_against(task)
}

/// `Σ_{f : s⋆ ⊨ f} w(f) ≤ 0`
pub fn build_goal_row(task: &Task, fs: &FeatureSet, weight_vars: &[usize]) -> Result<Row> {
    if !is_tnf(task) {
        return Err(Error::NotTnf);
    }
    let goal = task.goal_state().ok_or(Error::NotTnf)?;
    Ok(Row {
        name: Some("goal".into()),
        expr: potential_expression(fs, weight_vars, &goal),
        relation: Relation::Le,
        rhs: 0.0,
    })
}

/// Adds the rows of operator `op` (and its `z` unknowns) to `model`. Returns
/// the `(variable, z unknown)` pairs created, ordered by variable.
pub fn build_operator_rows(
    task: &Task,
    fs: &FeatureSet,
    op: usize,
    weight_vars: &[usize],
    model: &mut LpModel,
) -> Result<Vec<(usize, usize)>> {
    if !is_tnf(task) {
        return Err(Error::NotTnf);
    }
    if fs.dimension() > 2 {
        return Err(Error::DimensionTooHigh(fs.dimension()));
    }
    let o = &task.operators[op];
    let part = classify_features(fs, o);

    let mut main = LinearExpression::zero();
    for &i in &part.context_independent {
        main.add_term(weight_vars[i], delta_ind(o, fs.get(i))? as f64);
    }

    // outside variable → value → Σ w(f)·Δ_o(f_o)
    let mut context: BTreeMap<usize, Vec<LinearExpression>> = BTreeMap::new();
    for &i in &part.context_dependent {
        let f = fs.get(i);
        let (inside, outside): (Vec<_>, Vec<_>) = f.facts().iter().partition(|x| o.mentions(x.var));
        let outside = outside[0];
        let f_o = Feature::new(inside)?;
        let coef = delta_ind(o, &f_o)? as f64;
        let rows = context
            .entry(outside.var)
            .or_insert_with(|| vec![LinearExpression::zero(); task.variables[outside.var].domain_size()]);
        rows[outside.value].add_term(weight_vars[i], coef);
    }

    let mut z_vars = Vec::new();
    let mut z_rows = Vec::new();
    for (var, per_value) in context {
        let z = model.add_free(format!("z_o{op}_v{var}"));
        z_vars.push((var, z));
        main.add_term(z, 1.0);
        for (value, sum) in per_value.into_iter().enumerate() {
            z_rows.push((
                format!("ctx_o{op}_v{var}_{value}"),
                LinearExpression::var(z) - sum,
            ));
        }
    }
    model.add_named_row(format!("op{op}"), main, Relation::Le, o.cost as f64);
    for (name, expr) in z_rows {
        model.add_named_row(name, expr, Relation::Ge, 0.0);
    }
    Ok(z_vars)
}

/// `1 + Σ_o (1 + Σ_{V ∉ vars(o) paired with vars(o) by a feature} |dom(V)|)`
pub fn direct2d_row_count(task: &Task, fs: &FeatureSet) -> usize {
    let mut rows = 1;
    for o in &task.operators {
        rows += 1;
        for (var, v) in task.variables.iter().enumerate() {
            if o.mentions(var) {
                continue;
            }
            let paired = fs
                .features()
                .iter()
                .any(|f| f.mentions(var) && f.vars().any(|x| o.mentions(x)));
            if paired {
                rows += v.domain_size();
            }
        }
    }
    rows
}

impl Direct2dLp {
    pub fn build(task: &Task, fs: &FeatureSet) -> Result<Self> {
        check_input(task, fs)?;
        if fs.dimension() > 2 {
            return Err(Error::DimensionTooHigh(fs.dimension()));
        }
        let mut model = LpModel::new();
        let weight_vars = add_weight_unknowns(&mut model, fs);
        let goal = build_goal_row(task, fs, &weight_vars)?;
        model.rows.push(goal);
        let mut z_vars = BTreeMap::new();
        for op in 0..task.operators.len() {
            for (var, z) in build_operator_rows(task, fs, op, &weight_vars, &mut model)? {
                z_vars.insert((op, var), z);
            }
        }
        Ok(Direct2dLp {
            model,
            weight_vars,
            z_vars,
        })
    }

    pub fn into_potential_lp(self) -> PotentialLp {
        PotentialLp {
            model: self.model,
            weight_vars: self.weight_vars,
        }
    }

    /// Maximizes `φ(state)`.
    pub fn solve_for_state(
        task: &Task,
        fs: &FeatureSet,
        state: &State,
        solver: &dyn LpSolver,
    ) -> Result<PotentialSolution> {
        Self::build(task, fs)?
            .into_potential_lp()
            .solve_for_states(fs, std::slice::from_ref(state), solver)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature::generate_features;
    use crate::lp::SimplexSolver;
    use crate::task::fixtures::toy1;

    fn f(pairs: &[(usize, usize)]) -> Feature {
        Feature::from_pairs(pairs)
    }

    fn w(fs: &FeatureSet, lp: &Direct2dLp, pairs: &[(usize, usize)]) -> usize {
        lp.weight_vars[fs.index_of(&f(pairs)).unwrap()]
    }

    #[test]
    fn goal_rows() {
        let task = toy1();
        let fs1 = generate_features(&task, 1, None).unwrap();
        let lp1 = Direct2dLp::build(&task, &fs1).unwrap();
        let goal = &lp1.model.rows[0];
        let expected = LinearExpression::var(w(&fs1, &lp1, &[(0, 1)])) + LinearExpression::var(w(&fs1, &lp1, &[(1, 1)]));
        assert_eq!(goal.expr, expected);
        assert_eq!((goal.relation, goal.rhs), (Relation::Le, 0.0));

        let fs2 = generate_features(&task, 2, None).unwrap();
        let lp2 = Direct2dLp::build(&task, &fs2).unwrap();
        assert_eq!(lp2.model.rows[0].expr.num_terms(), 3);
        assert_eq!(lp2.model.rows[0].expr.coefficient(w(&fs2, &lp2, &[(0, 1), (1, 1)])), 1.0);

        let empty = FeatureSet::default();
        let row = build_goal_row(&task, &empty, &[]).unwrap();
        assert!(row.expr.is_zero());
    }

    #[test]
    fn dim1_operator_row() {
        let task = toy1();
        let fs = generate_features(&task, 1, None).unwrap();
        let lp = Direct2dLp::build(&task, &fs).unwrap();
        assert_eq!(lp.model.num_rows(), 3);
        assert_eq!(lp.model.num_unknowns(), 4);
        assert!(lp.z_vars.is_empty());
        let row = &lp.model.rows[1];
        let expected = LinearExpression::var(w(&fs, &lp, &[(0, 0)])) - LinearExpression::var(w(&fs, &lp, &[(0, 1)]));
        assert_eq!(row.expr, expected);
        assert_eq!(row.rhs, 1.0);
    }

    #[test]
    fn dim2_operator_rows_with_z() {
        let task = toy1();
        let fs = generate_features(&task, 2, None).unwrap();
        let lp = Direct2dLp::build(&task, &fs).unwrap();
        let z = lp.z_vars[&(0, 1)];
        let main = &lp.model.rows[1];
        let expected = LinearExpression::var(w(&fs, &lp, &[(0, 0)])) - LinearExpression::var(w(&fs, &lp, &[(0, 1)]))
            + LinearExpression::var(z);
        assert_eq!(main.expr, expected);
        let ctx0 = &lp.model.rows[2];
        let ctx1 = &lp.model.rows[3];
        let v = |pairs| LinearExpression::var(w(&fs, &lp, pairs));
        assert_eq!(ctx0.expr, LinearExpression::var(z) - (v(&[(0, 0), (1, 0)]) - v(&[(0, 1), (1, 0)])));
        assert_eq!(ctx1.expr, LinearExpression::var(z) - (v(&[(0, 0), (1, 1)]) - v(&[(0, 1), (1, 1)])));
        assert_eq!((ctx0.relation, ctx0.rhs), (Relation::Ge, 0.0));
        assert_eq!(lp.model.num_rows(), direct2d_row_count(&task, &fs));
        assert_eq!(lp.model.num_rows(), 1 + 2 * (1 + 2));
    }

    #[test]
    fn operator_on_all_variables_has_no_z() {
        let mut task = toy1();
        task.operators[0].pre = crate::task::PartialAssignment::from_pairs(&[(0, 0), (1, 0)]);
        task.operators[0].eff = crate::task::PartialAssignment::from_pairs(&[(0, 1), (1, 0)]);
        let fs = generate_features(&task, 2, None).unwrap();
        let mut model = LpModel::new();
        let wv = super::super::add_weight_unknowns(&mut model, &fs);
        let z = build_operator_rows(&task, &fs, 0, &wv, &mut model).unwrap();
        assert!(z.is_empty());
        assert_eq!(model.num_rows(), 1);
    }

    #[test]
    fn dimension_three_is_rejected() {
        use crate::task::{Operator, PartialAssignment, Variable};
        let task = Task::new(
            (0..3).map(|i| Variable::with_domain(format!("V{i}"), 2)).collect(),
            vec![Operator::new(
                "o",
                PartialAssignment::from_pairs(&[(0, 0)]),
                PartialAssignment::from_pairs(&[(0, 1)]),
                1,
            )],
            State(vec![0, 0, 0]),
            PartialAssignment::from_pairs(&[(0, 1), (1, 0), (2, 0)]),
        )
        .unwrap();
        let fs = generate_features(&task, 3, None).unwrap();
        assert!(matches!(Direct2dLp::build(&task, &fs), Err(Error::DimensionTooHigh(3))));
    }

    #[test]
    fn toy1_optima() {
        let task = toy1();
        let solver = SimplexSolver::default();
        for dim in [1, 2] {
            let fs = generate_features(&task, dim, None).unwrap();
            let sol = Direct2dLp::solve_for_state(&task, &fs, &task.initial_state, &solver).unwrap();
            assert!((sol.value - 2.0).abs() < 1e-9, "dim {dim}: {}", sol.value);
            assert!(!sol.bound_active);
            let goal = task.goal_state().unwrap();
            let at_goal = Direct2dLp::solve_for_state(&task, &fs, &goal, &solver).unwrap();
            assert!(at_goal.value.abs() < 1e-9);
        }
    }

    #[test]
    fn non_tnf_is_rejected() {
        let mut task = toy1();
        task.goal = crate::task::PartialAssignment::from_pairs(&[(0, 1)]);
        let fs = generate_features(&task, 1, None).unwrap();
        assert!(matches!(Direct2dLp::build(&task, &fs), Err(Error::NotTnf)));
    }
}
