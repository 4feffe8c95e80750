//! The potential LP for feature sets of any dimension: goal row, and per
//! operator `Δ^ind_o + Aux_{Ψ_o} ≤ cost(o)` plus the relaxed elimination
//! equations of `Ψ_o`.

use super::{
    bucket_eliminate_named, induced_width, min_fill_order, to_lp_constraints, DependencyGraph,
    ScopedFunction, ScopedFunctionSet,
};
use crate::error::{Error, Result};
use crate::feature::{classify_features, delta_ind, Feature, FeatureSet};
use crate::lp::{LinearExpression, LpModel, Relation};
use crate::potential::{add_weight_unknowns, build_goal_row, PotentialLp};
use crate::task::{Operator, Task};
use crate::tnf::is_tnf;

/// `[pre(o) ⊨ f|o] − [eff(o) ⊨ f|o]` for the part of `f` on `vars(o)`.
fn inside_delta(o: &Operator, f: &Feature) -> Result<i8> {
    let inside = Feature::new(f.facts().iter().copied().filter(|x| o.mentions(x.var)))?;
    delta_ind(o, &inside)
}

/// `Ψ_o`: for each context-dependent feature `f`, the function over
/// `vars(f) ∖ vars(o)` mapping `ν` to `w(f)·([pre(o) ∪ ν ⊨ f] − [eff(o) ∪ ν ⊨ f])`.
/// Base unknown `i` is the weight of feature `i`.
pub fn scoped_functions_for_operator(task: &Task, fs: &FeatureSet, op: usize) -> Result<ScopedFunctionSet> {
    let o = &task.operators[op];
    let domains = task.domain_sizes();
    let mut psi = ScopedFunctionSet::new(domains.clone(), fs.len());
    for i in classify_features(fs, o).context_dependent {
        let f = fs.get(i);
        let coef = inside_delta(o, f)? as f64;
        let outside: Vec<_> = f.facts().iter().copied().filter(|x| !o.mentions(x.var)).collect();
        let scope: Vec<usize> = outside.iter().map(|x| x.var).collect();
        let target: Vec<usize> = outside.iter().map(|x| x.value).collect();
        psi.push(ScopedFunction::from_fn(scope, &domains, |values| {
            if values == target.as_slice() {
                LinearExpression::term(i, coef)
            } else {
                LinearExpression::zero()
            }
        })?);
    }
    Ok(psi)
}

/// Variables outside `vars(o)` are adjacent when some feature that touches
/// `vars(o)` mentions both.
pub fn context_dependency_graph(task: &Task, fs: &FeatureSet, op: usize) -> DependencyGraph {
    let o = &task.operators[op];
    let mut g = DependencyGraph::new(task.num_vars());
    for f in fs.features() {
        if !f.vars().any(|v| o.mentions(v)) {
            continue;
        }
        let outside: Vec<usize> = f.vars().filter(|&v| !o.mentions(v)).collect();
        g.add_clique(&outside);
    }
    g
}

/// Per-operator statistics of the encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorEncoding {
    pub order: Vec<usize>,
    /// Induced width of the context-dependency graph along `order`.
    pub width: usize,
    /// Functions in `Ψ_o` that are not identically zero.
    pub functions: usize,
    pub aux_unknowns: usize,
    pub aux_rows: usize,
}

#[derive(Clone, Debug)]
pub struct GeneralLp {
    pub model: LpModel,
    pub weight_vars: Vec<usize>,
    pub operators: Vec<OperatorEncoding>,
}

impl GeneralLp {
    /// `w*`: the largest per-operator induced width.
    pub fn max_width(&self) -> usize {
        self.operators.iter().map(|o| o.width).max().unwrap_or(0)
    }

    pub fn into_potential_lp(self) -> PotentialLp {
        PotentialLp {
            model: self.model,
            weight_vars: self.weight_vars,
        }
    }
}

/// Builds the general LP. Without explicit `orders`, each operator uses the
/// min-fill order of its context-dependency graph. Functions of `Ψ_o` that
/// are zero everywhere are dropped before elimination.
pub fn build_general_lp(task: &Task, fs: &FeatureSet, orders: Option<&[Vec<usize>]>) -> Result<GeneralLp> {
    if !is_tnf(task) {
        return Err(Error::NotTnf);
    }
    fs.check_against(task)?;
    if let Some(orders) = orders {
        if orders.len() != task.operators.len() {
            return Err(Error::InvalidTask(format!(
                "{} orderings for {} operators",
                orders.len(),
                task.operators.len()
            )));
        }
    }
    let mut model = LpModel::new();
    let weight_vars = add_weight_unknowns(&mut model, fs);
    let goal = build_goal_row(task, fs, &weight_vars)?;
    model.rows.push(goal);

    let mut operators = Vec::with_capacity(task.operators.len());
    for (op, o) in task.operators.iter().enumerate() {
        let graph = context_dependency_graph(task, fs, op);
        let order = match orders {
            Some(orders) => orders[op].clone(),
            None => min_fill_order(&graph),
        };
        let width = induced_width(&graph, &order);

        let mut main = LinearExpression::zero();
        for &i in &classify_features(fs, o).context_independent {
            main.add_term(weight_vars[i], delta_ind(o, fs.get(i))? as f64);
        }
        let mut psi = scoped_functions_for_operator(task, fs, op)?;
        psi.functions.retain(|f| !f.is_zero());
        let functions = psi.functions.len();
        let es = bucket_eliminate_named(&psi, &order, &format!("aux_o{op}"))?;
        let enc = to_lp_constraints(&es, &mut model, &|i| weight_vars[i]);
        main.add_scaled(&enc.result, 1.0);
        model.add_named_row(format!("op{op}"), main, Relation::Le, o.cost as f64);
        operators.push(OperatorEncoding {
            order,
            width,
            functions,
            aux_unknowns: enc.aux_vars.len(),
            aux_rows: enc.rows.len(),
        });
    }
    Ok(GeneralLp {
        model,
        weight_vars,
        operators,
    })
}
