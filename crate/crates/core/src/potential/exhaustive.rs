//! Goal-awareness and consistency written out over the explicit transition
//! system: `φ(s) ≤ 0` for goal states and `φ(s) − φ(s′) ≤ cost(o)` for every
//! transition. Only usable at desk scale, where it serves as the reference LP.

use std::collections::HashSet;

use super::{add_weight_unknowns, potential_expression, PotentialLp};
use crate::error::Result;
use crate::feature::FeatureSet;
use crate::lp::{LpModel, Relation};
use crate::task::Task;
use crate::transition::build_transition_system;

/// Identical rows are emitted once, and rows whose left side vanishes are
/// dropped (costs are non-negative, so they always hold).
pub fn build_exhaustive_lp(task: &Task, fs: &FeatureSet, state_cap: u128) -> Result<PotentialLp> {
    fs.check_against(task)?;
    let ts = build_transition_system(task, state_cap)?;
    let mut model = LpModel::new();
    let weight_vars = add_weight_unknowns(&mut model, fs);

    for &g in &ts.goals {
        let expr = potential_expression(fs, &weight_vars, &ts.state(g));
        model.add_row(expr, Relation::Le, 0.0);
    }

    let mut seen: HashSet<(Vec<(usize, i8)>, u32)> = HashSet::new();
    let mut states = Vec::with_capacity(ts.num_states());
    for s in ts.states() {
        states.push(s);
    }
    let holds: Vec<Vec<bool>> = states
        .iter()
        .map(|s| fs.features().iter().map(|f| f.holds_in(s)).collect())
        .collect();
    for t in &ts.transitions {
        let before = &holds[t.source];
        let after = &holds[t.target];
        let key: Vec<(usize, i8)> = (0..fs.len())
            .filter_map(|i| {
                let d = before[i] as i8 - after[i] as i8;
                (d != 0).then_some((i, d))
            })
            .collect();
        if key.is_empty() {
            continue;
        }
        let cost = task.operators[t.op].cost;
        if !seen.insert((key.clone(), cost)) {
            continue;
        }
        let expr = crate::lp::LinearExpression::from_terms(
            0.0,
            key.iter().map(|&(i, d)| (weight_vars[i], d as f64)),
        );
        model.add_row(expr, Relation::Le, cost as f64);
    }
    Ok(PotentialLp { model, weight_vars })
}
