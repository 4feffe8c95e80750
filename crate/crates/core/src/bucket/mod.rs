//! Symbolic bucket elimination over linear expressions and the general
//! potential LP built from it.
//!
//! Maximizing a sum of scoped functions whose entries are linear expressions
//! produces a system of equations `Aux_i = max_j e_ij` that is then relaxed
//! into rows `Aux_i ≥ e_ij`.

mod general;
mod graph;

use std::fmt;

use crate::error::{Error, Result};
use crate::lp::{LinearExpression, LpModel, Relation};
use crate::task::StateIndexer;

pub use general::{
    build_general_lp, context_dependency_graph, scoped_functions_for_operator, GeneralLp,
    OperatorEncoding,
};
pub use graph::{induced_width, min_fill_order, DependencyGraph};

/// A table from assignments over `scope` to linear expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct ScopedFunction {
    scope: Vec<usize>,
    indexer: StateIndexer,
    table: Vec<LinearExpression>,
}

impl ScopedFunction {
    /// `table` lists the entries in mixed-radix order over `scope` (first
    /// variable most significant). `scope` must be strictly increasing.
    pub fn new(scope: Vec<usize>, domains: &[usize], table: Vec<LinearExpression>) -> Result<Self> {
        if scope.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidTask("scope must be strictly increasing".into()));
        }
        if let Some(&v) = scope.iter().find(|&&v| v >= domains.len()) {
            return Err(Error::InvalidTask(format!("scope variable {v} has no domain")));
        }
        let dims: Vec<usize> = scope.iter().map(|&v| domains[v]).collect();
        let indexer = StateIndexer::new(&dims);
        if table.len() != indexer.count() {
            return Err(Error::InvalidTask(format!(
                "table has {} entries, scope needs {}",
                table.len(),
                indexer.count()
            )));
        }
        Ok(ScopedFunction {
            scope,
            indexer,
            table,
        })
    }

    /// Builds the table from `entry(values)`, where `values` follow `scope`.
    pub fn from_fn(
        scope: Vec<usize>,
        domains: &[usize],
        mut entry: impl FnMut(&[usize]) -> LinearExpression,
    ) -> Result<Self> {
        let dims: Vec<usize> = scope.iter().map(|&v| domains.get(v).copied().unwrap_or(0)).collect();
        let indexer = StateIndexer::new(&dims);
        let table = (0..indexer.count()).map(|i| entry(&indexer.unrank(i))).collect();
        Self::new(scope, domains, table)
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn table(&self) -> &[LinearExpression] {
        &self.table
    }

    /// Entry for `values` given in scope order.
    pub fn entry(&self, values: &[usize]) -> &LinearExpression {
        &self.table[self.indexer.rank(values)]
    }

    /// Entry for the restriction of a full assignment indexed by variable id.
    pub fn at(&self, assignment: &[usize]) -> &LinearExpression {
        let index: usize = self
            .scope
            .iter()
            .zip(self.indexer.strides())
            .map(|(&v, &stride)| assignment[v] * stride)
            .sum();
        &self.table[index]
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(LinearExpression::is_zero)
    }
}

/// A set Ψ of scoped functions over variables with the given domains.
/// Expressions refer to base unknowns `0..num_base`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScopedFunctionSet {
    pub domains: Vec<usize>,
    pub functions: Vec<ScopedFunction>,
    pub num_base: usize,
}

impl ScopedFunctionSet {
    pub fn new(domains: Vec<usize>, num_base: usize) -> Self {
        ScopedFunctionSet {
            domains,
            functions: Vec::new(),
            num_base,
        }
    }

    pub fn push(&mut self, f: ScopedFunction) {
        self.functions.push(f);
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// `G(Ψ)`: variables sharing a scope are adjacent.
    pub fn dependency_graph(&self) -> DependencyGraph {
        let mut g = DependencyGraph::new(self.domains.len());
        for f in &self.functions {
            g.add_clique(f.scope());
        }
        g
    }

    /// `Σ_ψ ψ(assignment)` for a full assignment indexed by variable id.
    pub fn sum_at(&self, assignment: &[usize]) -> LinearExpression {
        let mut e = LinearExpression::zero();
        for f in &self.functions {
            e.add_scaled(f.at(assignment), 1.0);
        }
        e
    }
}

/// `Aux = max(candidates)`, introduced when eliminating `variable` under the
/// context assignment `context` (variable-id order).
#[derive(Clone, Debug, PartialEq)]
pub struct AuxDefinition {
    pub name: String,
    pub variable: usize,
    pub context: Vec<(usize, usize)>,
    pub candidates: Vec<LinearExpression>,
}

/// Output of bucket elimination. Expressions use ids `0..num_base` for base
/// unknowns and `num_base + i` for `aux[i]`; every definition only refers to
/// earlier auxiliaries. `result` is `Aux_Ψ`, the sum left after the last
/// bucket.
#[derive(Clone, Debug, PartialEq)]
pub struct EquationSystem {
    pub num_base: usize,
    pub aux: Vec<AuxDefinition>,
    pub result: LinearExpression,
}

impl EquationSystem {
    pub fn aux_id(&self, i: usize) -> usize {
        self.num_base + i
    }

    pub fn num_candidates(&self) -> usize {
        self.aux.iter().map(|a| a.candidates.len()).sum()
    }

    /// Solves the system bottom-up: auxiliary values and `Aux_Ψ`.
    pub fn evaluate(&self, base: &[f64]) -> (Vec<f64>, f64) {
        assert_eq!(base.len(), self.num_base, "one value per base unknown");
        let mut values = base.to_vec();
        for a in &self.aux {
            let v = a
                .candidates
                .iter()
                .map(|c| c.evaluate_dense(&values))
                .fold(f64::NEG_INFINITY, f64::max);
            values.push(v);
        }
        let result = self.result.evaluate_dense(&values);
        (values.split_off(self.num_base), result)
    }

    /// Renders the equations with `Aux1, Aux2, …` and the given base names.
    pub fn display<'a>(&'a self, base_name: &'a dyn Fn(usize) -> String) -> impl fmt::Display + 'a {
        DisplaySystem {
            system: self,
            base_name,
        }
    }
}

struct DisplaySystem<'a> {
    system: &'a EquationSystem,
    base_name: &'a dyn Fn(usize) -> String,
}

impl DisplaySystem<'_> {
    fn name(&self, id: usize) -> String {
        if id < self.system.num_base {
            (self.base_name)(id)
        } else {
            format!("Aux{}", id - self.system.num_base + 1)
        }
    }

    fn expr(&self, e: &LinearExpression) -> String {
        let mut out = String::new();
        for (id, c) in e.terms() {
            let sign = if c < 0.0 { "-" } else { "+" };
            let mag = c.abs();
            let coef = if mag == 1.0 { String::new() } else { format!("{mag}") };
            if out.is_empty() {
                let lead = if c < 0.0 { "-" } else { "" };
                out = format!("{lead}{coef}{}", self.name(id));
            } else {
                out.push_str(&format!(" {sign} {coef}{}", self.name(id)));
            }
        }
        if e.constant != 0.0 || out.is_empty() {
            if out.is_empty() {
                out = format!("{}", e.constant);
            } else {
                let sign = if e.constant < 0.0 { "-" } else { "+" };
                out.push_str(&format!(" {sign} {}", e.constant.abs()));
            }
        }
        out
    }
}

impl fmt::Display for DisplaySystem<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.system.aux.len();
        for (i, a) in self.system.aux.iter().enumerate() {
            let cands: Vec<String> = a.candidates.iter().map(|c| self.expr(c)).collect();
            writeln!(f, "Aux{} = max{{{}}}", i + 1, cands.join(", "))?;
        }
        writeln!(f, "Aux{} = {}", n + 1, self.expr(&self.system.result))
    }
}

/// Runs bucket elimination with auxiliaries named `aux_v{X}_{ν…}`.
pub fn bucket_eliminate(psi: &ScopedFunctionSet, order: &[usize]) -> Result<EquationSystem> {
    bucket_eliminate_named(psi, order, "aux")
}

/// Bucket elimination along `order` (σ). Each function goes to the bucket of
/// its σ-largest scope variable; buckets are processed from the end of σ,
/// and empty buckets are skipped.
pub fn bucket_eliminate_named(
    psi: &ScopedFunctionSet,
    order: &[usize],
    prefix: &str,
) -> Result<EquationSystem> {
    let nvars = psi.domains.len();
    let mut position = vec![usize::MAX; nvars];
    for (i, &v) in order.iter().enumerate() {
        if v < nvars {
            position[v] = i;
        }
    }
    let mut buckets: Vec<Vec<ScopedFunction>> = vec![Vec::new(); order.len()];
    let mut result = LinearExpression::zero();

    let place = |f: ScopedFunction,
                     buckets: &mut Vec<Vec<ScopedFunction>>,
                     result: &mut LinearExpression|
     -> Result<()> {
        match f.scope().iter().map(|&v| (position[v], v)).max() {
            None => result.add_scaled(&f.table[0], 1.0),
            Some((usize::MAX, v)) => return Err(Error::OrderingIncomplete(v)),
            Some((p, _)) => buckets[p].push(f),
        }
        Ok(())
    };
    for f in &psi.functions {
        place(f.clone(), &mut buckets, &mut result)?;
    }

    let mut aux: Vec<AuxDefinition> = Vec::new();
    let mut assignment = vec![0usize; nvars];
    for p in (0..order.len()).rev() {
        let bucket = std::mem::take(&mut buckets[p]);
        if bucket.is_empty() {
            continue;
        }
        let x = order[p];
        let mut scope: Vec<usize> = bucket
            .iter()
            .flat_map(|f| f.scope().iter().copied())
            .filter(|&v| v != x)
            .collect();
        scope.sort_unstable();
        scope.dedup();
        let dims: Vec<usize> = scope.iter().map(|&v| psi.domains[v]).collect();
        let contexts = StateIndexer::new(&dims);
        let mut table = Vec::with_capacity(contexts.count());
        for c in 0..contexts.count() {
            let values = contexts.unrank(c);
            for (&v, &val) in scope.iter().zip(&values) {
                assignment[v] = val;
            }
            let mut candidates: Vec<LinearExpression> = Vec::new();
            for xv in 0..psi.domains[x] {
                assignment[x] = xv;
                let mut sum = LinearExpression::zero();
                for f in &bucket {
                    sum.add_scaled(f.at(&assignment), 1.0);
                }
                if !candidates.contains(&sum) {
                    candidates.push(sum);
                }
            }
            let context: Vec<(usize, usize)> = scope.iter().copied().zip(values).collect();
            let mut name = format!("{prefix}_v{x}");
            for &(_, val) in &context {
                name.push_str(&format!("_{val}"));
            }
            let id = psi.num_base + aux.len();
            aux.push(AuxDefinition {
                name,
                variable: x,
                context,
                candidates,
            });
            table.push(LinearExpression::var(id));
        }
        let generated = ScopedFunction::new(scope, &psi.domains, table)?;
        place(generated, &mut buckets, &mut result)?;
    }
    Ok(EquationSystem {
        num_base: psi.num_base,
        aux,
        result,
    })
}

/// Rows and unknowns added to a model for an equation system.
#[derive(Clone, Debug, PartialEq)]
pub struct LpEncoding {
    /// Model unknown of each auxiliary.
    pub aux_vars: Vec<usize>,
    /// `Aux_Ψ` over model unknowns.
    pub result: LinearExpression,
    pub rows: std::ops::Range<usize>,
}

/// Adds one free unknown per auxiliary and one row `Aux_i ≥ e` per candidate
/// `e`. Base unknown `i` maps to model unknown `base_map(i)`. `Aux_Ψ` gets no
/// unknown of its own: it is returned as an expression over the auxiliaries.
pub fn to_lp_constraints(
    es: &EquationSystem,
    model: &mut LpModel,
    base_map: &dyn Fn(usize) -> usize,
) -> LpEncoding {
    let first_row = model.num_rows();
    let mut aux_vars = Vec::with_capacity(es.aux.len());
    let map = |id: usize, aux_vars: &[usize]| {
        if id < es.num_base {
            base_map(id)
        } else {
            aux_vars[id - es.num_base]
        }
    };
    for a in &es.aux {
        let id = model.add_free(a.name.clone());
        for c in &a.candidates {
            let cand = c.remap(|i| map(i, &aux_vars));
            model.add_row(LinearExpression::var(id) - cand, Relation::Ge, 0.0);
        }
        aux_vars.push(id);
    }
    let result = es.result.remap(|i| map(i, &aux_vars));
    LpEncoding {
        aux_vars,
        result,
        rows: first_row..model.num_rows(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve, LpStatus, Sense};

    const A: usize = 0;
    const B: usize = 1;

    fn e(terms: &[(usize, f64)]) -> LinearExpression {
        LinearExpression::from_terms(0.0, terms.iter().copied())
    }

    /// The two-function example over binary X (0) and Y (1) with unknowns a, b.
    fn two_var_example() -> ScopedFunctionSet {
        let domains = vec![2, 2];
        let mut psi = ScopedFunctionSet::new(domains.clone(), 2);
        psi.push(
            ScopedFunction::new(vec![0], &domains, vec![e(&[(A, 3.0), (B, -2.0)]), e(&[(A, 4.0), (B, 2.0)])])
                .unwrap(),
        );
        psi.push(
            ScopedFunction::new(
                vec![0, 1],
                &domains,
                vec![e(&[(A, 8.0)]), e(&[(B, 7.0)]), e(&[(B, -3.0)]), LinearExpression::zero()],
            )
            .unwrap(),
        );
        psi
    }

    #[test]
    fn golden_example_equations() {
        let es = bucket_eliminate(&two_var_example(), &[0, 1]).unwrap();
        let aux = |i: usize| es.aux_id(i);
        assert_eq!(es.aux.len(), 3);
        assert_eq!(es.aux[0].candidates, vec![e(&[(A, 8.0)]), e(&[(B, 7.0)])]);
        assert_eq!(es.aux[1].candidates, vec![e(&[(B, -3.0)]), LinearExpression::zero()]);
        assert_eq!(
            es.aux[2].candidates,
            vec![e(&[(A, 3.0), (B, -2.0), (aux(0), 1.0)]), e(&[(A, 4.0), (B, 2.0), (aux(1), 1.0)])]
        );
        assert_eq!(es.result, LinearExpression::var(aux(2)));
        let names = |i: usize| ["a", "b"][i].to_string();
        assert_eq!(
            es.display(&names).to_string(),
            "Aux1 = max{8a, 7b}\nAux2 = max{-3b, 0}\nAux3 = max{3a - 2b + Aux1, 4a + 2b + Aux2}\nAux4 = Aux3\n"
        );
    }

    #[test]
    fn golden_example_values() {
        let es = bucket_eliminate(&two_var_example(), &[0, 1]).unwrap();
        let (aux, result) = es.evaluate(&[1.0, 1.0]);
        assert_eq!(aux, vec![8.0, 0.0, 9.0]);
        assert_eq!(result, 9.0);
    }

    #[test]
    fn golden_example_lp_rows() {
        let es = bucket_eliminate(&two_var_example(), &[0, 1]).unwrap();
        let mut model = LpModel::new();
        model.add_free("a");
        model.add_free("b");
        let enc = to_lp_constraints(&es, &mut model, &|i| i);
        assert_eq!(enc.rows.len(), 6);
        assert!(model.rows.iter().all(|r| r.relation == Relation::Ge && r.rhs == 0.0));
        assert_eq!(enc.aux_vars, vec![2, 3, 4]);
        assert_eq!(enc.result, LinearExpression::var(4));
    }

    #[test]
    fn empty_set_sums_to_zero() {
        let psi = ScopedFunctionSet::new(vec![2, 2], 0);
        let es = bucket_eliminate(&psi, &[0, 1]).unwrap();
        assert!(es.aux.is_empty());
        assert!(es.result.is_zero());
        let mut model = LpModel::new();
        let enc = to_lp_constraints(&es, &mut model, &|i| i);
        assert!(enc.rows.is_empty());
    }

    #[test]
    fn single_candidate_gives_one_row() {
        let domains = vec![1];
        let mut psi = ScopedFunctionSet::new(domains.clone(), 0);
        psi.push(ScopedFunction::new(vec![0], &domains, vec![LinearExpression::constant(5.0)]).unwrap());
        let es = bucket_eliminate(&psi, &[0]).unwrap();
        let mut model = LpModel::new();
        let enc = to_lp_constraints(&es, &mut model, &|i| i);
        assert_eq!(enc.rows.len(), 1);
        model.set_objective(Sense::Minimize, enc.result);
        let sol = solve(&model).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value.unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn incomplete_order_is_rejected() {
        assert!(matches!(
            bucket_eliminate(&two_var_example(), &[0]),
            Err(Error::OrderingIncomplete(1))
        ));
    }

    #[test]
    fn empty_scope_functions_go_to_the_result() {
        let domains = vec![2];
        let mut psi = ScopedFunctionSet::new(domains.clone(), 1);
        psi.push(ScopedFunction::new(vec![], &domains, vec![e(&[(0, 2.0)])]).unwrap());
        let es = bucket_eliminate(&psi, &[0]).unwrap();
        assert!(es.aux.is_empty());
        assert_eq!(es.result, e(&[(0, 2.0)]));
    }

    #[test]
    fn aux_names_follow_context_values() {
        let es = bucket_eliminate_named(&two_var_example(), &[0, 1], "aux_o3").unwrap();
        let names: Vec<&str> = es.aux.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, vec!["aux_o3_v1_0", "aux_o3_v1_1", "aux_o3_v0"]);
    }
}
