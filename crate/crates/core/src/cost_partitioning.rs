//! Projection abstractions and the transition and operator cost-partitioning
//! LPs over an explicit transition system.

use crate::error::{Error, Result};
use crate::feature::{Feature, FeatureSet, WeightFunction};
use crate::lp::{LinearExpression, LpModel, LpSolution, Relation, Sense};
use crate::task::{Fact, StateIndexer, State};
use crate::transition::{exact_goal_distances, Transition, TransitionSystem};

/// Projection of a transition system onto a set of variables.
#[derive(Clone, Debug)]
pub struct Projection {
    /// Sorted variable ids.
    pub pattern: Vec<usize>,
    indexer: StateIndexer,
    /// Concrete state index to abstract state index.
    pub mapping: Vec<usize>,
    /// Abstract image of each concrete transition, in the same order.
    pub transitions: Vec<Transition>,
    /// Sorted abstract goal states.
    pub goals: Vec<usize>,
    op_costs: Vec<f64>,
}

impl Projection {
    pub fn num_states(&self) -> usize {
        self.indexer.count()
    }

    /// Values of abstract state `k`, one per pattern variable.
    pub fn abstract_state(&self, k: usize) -> Vec<usize> {
        self.indexer.unrank(k)
    }

    pub fn abstract_of(&self, state: &State) -> usize {
        let values: Vec<usize> = self.pattern.iter().map(|&v| state[v]).collect();
        self.indexer.rank(&values)
    }

    /// The conjunction describing abstract state `k`.
    pub fn feature(&self, k: usize) -> Result<Feature> {
        let values = self.abstract_state(k);
        Feature::new(self.pattern.iter().zip(values).map(|(&v, x)| Fact::new(v, x)))
    }

    /// Abstract goal distances when concrete transition `t` costs `costs[t]`.
    pub fn goal_distances(&self, costs: &[f64]) -> Vec<f64> {
        assert_eq!(costs.len(), self.transitions.len());
        let mut order: Vec<usize> = (0..self.transitions.len()).collect();
        order.sort_by_key(|&i| (self.transitions[i].source, self.transitions[i].op, i));
        let ts = TransitionSystem::from_parts(
            self.indexer.dims(),
            order.iter().map(|&i| self.transitions[i]).collect(),
            0,
            self.goals.clone(),
            self.op_costs.clone(),
        );
        let sorted_costs: Vec<f64> = order.iter().map(|&i| costs[i]).collect();
        exact_goal_distances(&ts, &sorted_costs)
    }
}

/// `α(s) = s|_pattern` for every state, with one abstract transition per
/// concrete transition.
pub fn project(ts: &TransitionSystem, pattern: &[usize]) -> Result<Projection> {
    let domains = ts.domains();
    let mut pattern = pattern.to_vec();
    pattern.sort_unstable();
    pattern.dedup();
    if let Some(&v) = pattern.iter().find(|&&v| v >= domains.len()) {
        return Err(Error::InvalidTask(format!("pattern variable {v} does not exist")));
    }
    let indexer = StateIndexer::new(&pattern.iter().map(|&v| domains[v]).collect::<Vec<_>>());
    let mapping: Vec<usize> = (0..ts.num_states())
        .map(|i| {
            let s = ts.state(i);
            let values: Vec<usize> = pattern.iter().map(|&v| s[v]).collect();
            indexer.rank(&values)
        })
        .collect();
    let transitions = ts
        .transitions
        .iter()
        .map(|t| Transition {
            source: mapping[t.source],
            op: t.op,
            target: mapping[t.target],
        })
        .collect();
    let mut goals: Vec<usize> = ts.goals.iter().map(|&g| mapping[g]).collect();
    goals.sort_unstable();
    goals.dedup();
    Ok(Projection {
        pattern,
        indexer,
        mapping,
        transitions,
        goals,
        op_costs: ts.op_costs.clone(),
    })
}

/// All projections onto `1..=max_size` variables, smaller patterns first.
pub fn all_projections(ts: &TransitionSystem, max_size: usize) -> Result<Vec<Projection>> {
    let n = ts.domains().len();
    let mut patterns: Vec<Vec<usize>> = Vec::new();
    fn extend(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if left == 0 {
            return;
        }
        for v in start..n {
            cur.push(v);
            extend(v + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    extend(0, n, max_size, &mut Vec::new(), &mut patterns);
    patterns.sort_by_key(|p| (p.len(), p.clone()));
    patterns.iter().map(|p| project(ts, p)).collect()
}

/// Per-transition costs, indexed like `TransitionSystem::transitions`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionCostFunction {
    pub costs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionCheck {
    pub valid: bool,
    /// First transition where the summed costs exceed the operator cost.
    pub violation: Option<usize>,
}

/// `Σ_i cost_i(t) ≤ cost(o)` for every transition, within `10⁻⁶`.
pub fn validate_partition(ts: &TransitionSystem, functions: &[TransitionCostFunction]) -> PartitionCheck {
    let violation = ts.transitions.iter().enumerate().position(|(i, t)| {
        let sum: f64 = functions.iter().map(|f| f.costs[i]).sum();
        sum > ts.op_costs[t.op] + 1e-6
    });
    PartitionCheck {
        valid: violation.is_none(),
        violation,
    }
}

/// A TCP or OCP LP with its unknowns.
#[derive(Clone, Debug)]
pub struct CostPartitioningLp {
    pub model: LpModel,
    /// `h_vars[α][k]`: the value of abstract state `k` of abstraction `α`.
    pub h_vars: Vec<Vec<usize>>,
    /// `c_vars[α]`: one unknown per concrete transition (TCP) or per operator (OCP).
    pub c_vars: Vec<Vec<usize>>,
    pub per_operator: bool,
}

impl CostPartitioningLp {
    /// The cost function of every abstraction in a solution, per transition.
    pub fn cost_functions(&self, ts: &TransitionSystem, sol: &LpSolution) -> Vec<TransitionCostFunction> {
        self.c_vars
            .iter()
            .map(|vars| TransitionCostFunction {
                costs: ts
                    .transitions
                    .iter()
                    .enumerate()
                    .map(|(i, t)| sol.values[vars[if self.per_operator { t.op } else { i }]])
                    .collect(),
            })
            .collect()
    }

    /// Abstract heuristic values `h[α][k]` in a solution.
    pub fn abstract_values(&self, sol: &LpSolution) -> Vec<Vec<f64>> {
        self.h_vars
            .iter()
            .map(|vars| vars.iter().map(|&id| sol.values[id]).collect())
            .collect()
    }
}

fn build_cp_lp(ts: &TransitionSystem, abstractions: &[Projection], s: &State, per_operator: bool) -> CostPartitioningLp {
    let mut model = LpModel::new();
    let h_vars: Vec<Vec<usize>> = abstractions
        .iter()
        .enumerate()
        .map(|(a, p)| (0..p.num_states()).map(|k| model.add_free(format!("h_a{a}_{k}"))).collect())
        .collect();
    let c_vars: Vec<Vec<usize>> = (0..abstractions.len())
        .map(|a| {
            if per_operator {
                (0..ts.op_costs.len()).map(|o| model.add_free(format!("c_a{a}_o{o}"))).collect()
            } else {
                (0..ts.transitions.len()).map(|t| model.add_free(format!("c_a{a}_t{t}"))).collect()
            }
        })
        .collect();

    for (a, p) in abstractions.iter().enumerate() {
        for &g in &p.goals {
            model.add_named_row(
                format!("goal_a{a}_{g}"),
                LinearExpression::var(h_vars[a][g]),
                Relation::Eq,
                0.0,
            );
        }
    }
    for (a, p) in abstractions.iter().enumerate() {
        let mut seen = std::collections::BTreeSet::new();
        for (i, t) in p.transitions.iter().enumerate() {
            let c = if per_operator { c_vars[a][t.op] } else { c_vars[a][i] };
            if per_operator && !seen.insert((t.source, t.op, t.target)) {
                continue;
            }
            let mut e = LinearExpression::zero();
            e.add_term(h_vars[a][t.source], 1.0);
            e.add_term(h_vars[a][t.target], -1.0);
            e.add_term(c, -1.0);
            let name = if per_operator {
                format!("cons_a{a}_{}_o{}_{}", t.source, t.op, t.target)
            } else {
                format!("cons_a{a}_t{i}")
            };
            model.add_named_row(name, e, Relation::Le, 0.0);
        }
    }
    let partitions = if per_operator { ts.op_costs.len() } else { ts.transitions.len() };
    for j in 0..partitions {
        let cost = if per_operator { ts.op_costs[j] } else { ts.op_costs[ts.transitions[j].op] };
        let e = LinearExpression::from_terms(0.0, c_vars.iter().map(|vars| (vars[j], 1.0)));
        let name = if per_operator { format!("part_o{j}") } else { format!("part_t{j}") };
        model.add_named_row(name, e, Relation::Le, cost);
    }
    let objective = LinearExpression::from_terms(
        0.0,
        abstractions.iter().enumerate().map(|(a, p)| (h_vars[a][p.abstract_of(s)], 1.0)),
    );
    model.set_objective(Sense::Maximize, objective);
    CostPartitioningLp {
        model,
        h_vars,
        c_vars,
        per_operator,
    }
}

/// Optimal transition cost partitioning at `s`: one cost unknown per
/// abstraction and concrete transition.
pub fn build_tcp_lp(ts: &TransitionSystem, abstractions: &[Projection], s: &State) -> CostPartitioningLp {
    build_cp_lp(ts, abstractions, s, false)
}

/// Optimal operator cost partitioning at `s`: one cost unknown per
/// abstraction and operator.
pub fn build_ocp_lp(ts: &TransitionSystem, abstractions: &[Projection], s: &State) -> CostPartitioningLp {
    build_cp_lp(ts, abstractions, s, true)
}

/// One conjunction per abstract state, abstraction by abstraction. Feature
/// `offsets[α] + k` stands for abstract state `k` of `α`.
pub fn features_of_abstractions(abstractions: &[Projection]) -> Result<(FeatureSet, Vec<usize>)> {
    let mut features = Vec::new();
    let mut offsets = Vec::with_capacity(abstractions.len());
    for p in abstractions {
        if p.pattern.is_empty() {
            return Err(Error::EmptyPattern);
        }
        offsets.push(features.len());
        for k in 0..p.num_states() {
            features.push(p.feature(k)?);
        }
    }
    Ok((FeatureSet::new(features)?, offsets))
}

/// `w′(α(s)) = w(α(s)) − w(α(s⋆))` for the weights of
/// [`features_of_abstractions`], where `goal` is a concrete goal state index.
pub fn shift_normalize(abstractions: &[Projection], offsets: &[usize], w: &WeightFunction, goal: usize) -> WeightFunction {
    let mut shifted = w.clone();
    for (p, &off) in abstractions.iter().zip(offsets) {
        let base = w.0[off + p.mapping[goal]];
        for k in 0..p.num_states() {
            shifted.0[off + k] -= base;
        }
    }
    shifted
}

/// `Σ_α h^α(α(s))` with `h^α` the abstract goal distances under `cost_α`.
pub fn partitioned_heuristic(abstractions: &[Projection], functions: &[TransitionCostFunction], s: &State) -> f64 {
    abstractions
        .iter()
        .zip(functions)
        .map(|(p, f)| p.goal_distances(&f.costs)[p.abstract_of(s)])
        .sum()
}
