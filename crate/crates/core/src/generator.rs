//! Seeded random planning tasks small enough for the explicit oracles.

use std::collections::{HashSet, VecDeque};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::feature::{Feature, FeatureSet};
use crate::task::{Fact, Operator, PartialAssignment, State, StateIndexer, Task, Variable};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub vars: usize,
    /// Domain sizes are drawn uniformly from `2..=max_domain`.
    pub max_domain: usize,
    pub ops: usize,
    /// Costs are drawn uniformly from `min_cost..=max_cost`.
    pub min_cost: u32,
    pub max_cost: u32,
    /// Largest number of variables an operator mentions.
    pub max_op_vars: usize,
    /// Redraw until the goal is reachable from the initial state.
    pub solvable: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            vars: 3,
            max_domain: 3,
            ops: 5,
            min_cost: 1,
            max_cost: 3,
            max_op_vars: 2,
            solvable: true,
        }
    }
}

const MAX_ATTEMPTS: usize = 10_000;

fn variables(rng: &mut ChaCha8Rng, config: &GeneratorConfig) -> Vec<Variable> {
    (0..config.vars)
        .map(|i| Variable::with_domain(format!("v{i}"), rng.gen_range(2..=config.max_domain.max(2))))
        .collect()
}

fn random_state(rng: &mut ChaCha8Rng, domains: &[usize]) -> State {
    State(domains.iter().map(|&d| rng.gen_range(0..d)).collect())
}

fn random_tnf_operator(rng: &mut ChaCha8Rng, domains: &[usize], config: &GeneratorConfig, id: usize) -> Operator {
    let k = rng.gen_range(1..=config.max_op_vars.clamp(1, domains.len()));
    let mut vars = sample(rng, domains.len(), k).into_vec();
    vars.sort_unstable();
    let changed = vars[rng.gen_range(0..k)];
    let mut pre = PartialAssignment::empty();
    let mut eff = PartialAssignment::empty();
    for &v in &vars {
        let p = rng.gen_range(0..domains[v]);
        let e = if v == changed {
            // force at least one variable to change
            (p + rng.gen_range(1..domains[v])) % domains[v]
        } else {
            rng.gen_range(0..domains[v])
        };
        pre.set(v, p);
        eff.set(v, e);
    }
    Operator::new(format!("op{id}"), pre, eff, rng.gen_range(config.min_cost..=config.max_cost.max(config.min_cost)))
}

/// True when some goal state is reachable from the initial state.
pub fn goal_reachable(task: &Task) -> bool {
    let indexer = StateIndexer::new(&task.domain_sizes());
    let mut seen = vec![false; indexer.count()];
    let start = indexer.rank(task.initial_state.values());
    seen[start] = true;
    let mut queue = VecDeque::from([task.initial_state.clone()]);
    while let Some(s) = queue.pop_front() {
        if task.is_goal(&s) {
            return true;
        }
        for o in &task.operators {
            if o.is_applicable(&s) {
                let next = o.apply_unchecked(&s);
                let r = indexer.rank(next.values());
                if !seen[r] {
                    seen[r] = true;
                    queue.push_back(next);
                }
            }
        }
    }
    false
}

/// A random task in transition normal form.
///
/// # Panics
/// When `config.solvable` is set and no solvable draw is found.
pub fn random_tnf_task(config: &GeneratorConfig, seed: u64) -> Task {
    try_random_tnf_task(config, seed).unwrap_or_else(|e| panic!("{e} for {config:?}"))
}

pub fn try_random_tnf_task(config: &GeneratorConfig, seed: u64) -> Result<Task> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let variables = variables(&mut rng, config);
        let domains: Vec<usize> = variables.iter().map(Variable::domain_size).collect();
        let operators = (0..config.ops)
            .map(|i| random_tnf_operator(&mut rng, &domains, config, i))
            .collect();
        let init = random_state(&mut rng, &domains);
        let goal = random_state(&mut rng, &domains);
        if goal == init {
            continue;
        }
        let goal = goal.to_partial();
        let task = Task::new(variables, operators, init, goal).expect("generated task is valid");
        if !config.solvable || goal_reachable(&task) {
            return Ok(task);
        }
    }
    Err(Error::NoSolvableTask(MAX_ATTEMPTS))
}

/// A random task that is generally not in TNF: operators may set variables
/// without a precondition on them or require variables they leave unchanged,
/// and the goal may be partial.
///
/// # Panics
/// When `config.solvable` is set and no solvable draw is found.
pub fn random_task(config: &GeneratorConfig, seed: u64) -> Task {
    try_random_task(config, seed).unwrap_or_else(|e| panic!("{e} for {config:?}"))
}

pub fn try_random_task(config: &GeneratorConfig, seed: u64) -> Result<Task> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let variables = variables(&mut rng, config);
        let domains: Vec<usize> = variables.iter().map(Variable::domain_size).collect();
        let mut operators = Vec::with_capacity(config.ops);
        for id in 0..config.ops {
            let n = domains.len();
            let k = rng.gen_range(1..=config.max_op_vars.clamp(1, n));
            let vars = sample(&mut rng, n, k).into_vec();
            let mut pre = PartialAssignment::empty();
            let mut eff = PartialAssignment::empty();
            for (j, &v) in vars.iter().enumerate() {
                // the first variable always gets an effect
                let role = if j == 0 { rng.gen_range(0..2) } else { rng.gen_range(0..3) };
                match role {
                    0 => eff.set(v, rng.gen_range(0..domains[v])),
                    1 => {
                        pre.set(v, rng.gen_range(0..domains[v]));
                        eff.set(v, rng.gen_range(0..domains[v]));
                    }
                    _ => pre.set(v, rng.gen_range(0..domains[v])),
                }
            }
            operators.push(Operator::new(format!("op{id}"), pre, eff, rng.gen_range(config.min_cost..=config.max_cost.max(config.min_cost))));
        }
        let init = random_state(&mut rng, &domains);
        let mut goal = PartialAssignment::empty();
        for (v, &d) in domains.iter().enumerate() {
            if v == 0 || rng.gen_bool(0.5) {
                goal.set(v, rng.gen_range(0..d));
            }
        }
        let task = Task::new(variables, operators, init, goal).expect("generated task is valid");
        if !config.solvable || goal_reachable(&task) {
            return Ok(task);
        }
    }
    Err(Error::NoSolvableTask(MAX_ATTEMPTS))
}

/// All atomic features plus `extra` distinct random conjunctions of
/// `2..=max_size` facts, at least one of them of size `max_size`.
pub fn random_feature_set(task: &Task, max_size: usize, extra: usize, seed: u64) -> FeatureSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domains = task.domain_sizes();
    let max_size = max_size.clamp(1, domains.len());
    let mut features: Vec<Feature> = FeatureSet::all_up_to(task, 1).features().to_vec();
    if max_size < 2 {
        return FeatureSet::new(features).expect("atomic features are distinct");
    }
    let mut seen: HashSet<Feature> = HashSet::new();
    let mut attempts = 0;
    while seen.len() < extra && attempts < MAX_ATTEMPTS {
        attempts += 1;
        let size = if seen.is_empty() { max_size } else { rng.gen_range(2..=max_size) };
        let vars = sample(&mut rng, domains.len(), size).into_vec();
        let f = Feature::new(vars.into_iter().map(|v| Fact::new(v, rng.gen_range(0..domains[v]))))
            .expect("distinct variables");
        if seen.insert(f.clone()) {
            features.push(f);
        }
    }
    FeatureSet::new(features).expect("features are distinct")
}
