//! LPs whose feasible weight functions are exactly the goal-aware and
//! consistent potentials over a feature set.

mod direct2d;
mod exhaustive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::feature::{evaluate_potential, Feature, FeatureSet, WeightFunction};
use crate::lp::{LinearExpression, LpModel, LpSolver, LpStatus, Sense, WEIGHT_BOUND};
use crate::task::{State, Task};

pub use direct2d::{build_goal_row, build_operator_rows, direct2d_row_count, Direct2dLp};
pub use exhaustive::build_exhaustive_lp;

/// Name of the weight unknown of feature `i`.
pub fn weight_name(i: usize) -> String {
    format!("w{i}")
}

/// Declares one bounded weight unknown per feature, in feature order.
pub fn add_weight_unknowns(model: &mut LpModel, fs: &FeatureSet) -> Vec<usize> {
    (0..fs.len())
        .map(|i| model.add_unknown(weight_name(i), -WEIGHT_BOUND, WEIGHT_BOUND))
        .collect()
}

/// `Σ_{f : s ⊨ f} w(f)`
pub fn potential_expression(fs: &FeatureSet, weight_vars: &[usize], state: &State) -> LinearExpression {
    let mut e = LinearExpression::zero();
    for (i, f) in fs.iter() {
        if f.holds_in(state) {
            e.add_term(weight_vars[i], 1.0);
        }
    }
    e
}

/// The mean of `φ(s)` over `states`.
pub fn mean_potential_expression(
    fs: &FeatureSet,
    weight_vars: &[usize],
    states: &[State],
) -> LinearExpression {
    let mut e = LinearExpression::zero();
    if states.is_empty() {
        return e;
    }
    let scale = 1.0 / states.len() as f64;
    for s in states {
        e.add_scaled(&potential_expression(fs, weight_vars, s), scale);
    }
    e
}

/// A potential LP together with the unknown of every feature weight.
#[derive(Clone, Debug)]
pub struct PotentialLp {
    pub model: LpModel,
    pub weight_vars: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSolution {
    pub weights: WeightFunction,
    /// Optimal objective value (φ of the state, or the sample mean).
    pub value: f64,
    /// Some weight sits at its artificial bound.
    pub bound_active: bool,
}

impl PotentialLp {
    /// Maximizes the mean potential of `states`.
    pub fn solve_for_states(
        &mut self,
        fs: &FeatureSet,
        states: &[State],
        solver: &dyn LpSolver,
    ) -> Result<PotentialSolution> {
        let objective = mean_potential_expression(fs, &self.weight_vars, states);
        self.model.set_objective(Sense::Maximize, objective);
        let sol = solver.solve(&self.model)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::LpNotOptimal(sol.status));
        }
        let weights: Vec<f64> = self.weight_vars.iter().map(|&id| sol.values[id]).collect();
        let bound_active = weights
            .iter()
            .any(|w| w.abs() >= WEIGHT_BOUND * (1.0 - 1e-9));
        Ok(PotentialSolution {
            weights: WeightFunction(weights),
            value: sol.objective_value.unwrap_or(0.0),
            bound_active,
        })
    }
}

/// Moves `φ(s⋆)` to zero by subtracting it from every atom of the first
/// variable whose atoms are all features. Each state satisfies exactly one of
/// those atoms, so every difference `φ(s) − φ(s′)` is kept. `None` without a
/// single goal state or without such a variable.
pub fn shift_to_goal(task: &Task, fs: &FeatureSet, w: &WeightFunction) -> Option<WeightFunction> {
    let goal = task.goal_state()?;
    let atoms: Vec<usize> = (0..task.num_vars()).find_map(|v| {
        (0..task.variables[v].domain_size())
            .map(|d| fs.index_of(&Feature::from_pairs(&[(v, d)])))
            .collect::<Option<Vec<_>>>()
    })?;
    let offset = evaluate_potential(fs, w, &goal);
    let mut shifted = w.clone();
    for i in atoms {
        shifted.0[i] -= offset;
    }
    Some(shifted)
}

/// Which states the weights are optimized for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    Init,
    /// Mean over this many random-walk samples.
    Samples(usize),
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "init" {
            return Ok(Objective::Init);
        }
        match s.strip_prefix("samples:").map(str::parse::<usize>) {
            Some(Ok(n)) if n > 0 => Ok(Objective::Samples(n)),
            _ => Err(format!("expected `init` or `samples:N` with N > 0, got {s:?}")),
        }
    }
}

/// States for an objective: the initial state, or `n` endpoints of random
/// walks from it whose lengths are uniform in `0..=2·|𝒱|`.
pub fn objective_states(task: &Task, objective: Objective, seed: u64) -> Vec<State> {
    match objective {
        Objective::Init => vec![task.initial_state.clone()],
        Objective::Samples(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let max_len = 2 * task.num_vars();
            (0..n)
                .map(|_| {
                    let len = rng.gen_range(0..=max_len);
                    let mut s = task.initial_state.clone();
                    for _ in 0..len {
                        let applicable: Vec<_> =
                            task.operators.iter().filter(|o| o.is_applicable(&s)).collect();
                        match applicable.choose(&mut rng) {
                            Some(o) => s = o.apply_unchecked(&s),
                            None => break,
                        }
                    }
                    s
                })
                .collect()
        }
    }
}
