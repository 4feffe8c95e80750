//! Explicit transition systems over the full state space and exact goal distances.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::error::{Error, Result};
use crate::task::{State, StateIndexer, Task};

/// Default limit for explicit state-space construction.
pub const DEFAULT_STATE_CAP: u128 = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transition {
    pub source: usize,
    pub op: usize,
    pub target: usize,
}

/// All states of a task (not only the reachable ones) with every applicable
/// `(state, operator)` pair. States are indexed by their mixed-radix rank.
#[derive(Clone, Debug)]
pub struct TransitionSystem {
    indexer: StateIndexer,
    /// Sorted by source, then operator.
    pub transitions: Vec<Transition>,
    /// `out_offsets[s]..out_offsets[s + 1]` are the transitions leaving `s`.
    out_offsets: Vec<usize>,
    pub initial: usize,
    pub goals: Vec<usize>,
    /// Operator costs of the task the system was built from.
    pub op_costs: Vec<f64>,
}

impl TransitionSystem {
    pub fn num_states(&self) -> usize {
        self.indexer.count()
    }

    pub fn state(&self, index: usize) -> State {
        State(self.indexer.unrank(index))
    }

    pub fn index_of(&self, state: &State) -> usize {
        self.indexer.rank(state.values())
    }

    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        (0..self.num_states()).map(|i| self.state(i))
    }

    pub fn outgoing(&self, state: usize) -> &[Transition] {
        &self.transitions[self.out_offsets[state]..self.out_offsets[state + 1]]
    }

    /// Per-transition costs under the task's own cost function.
    pub fn transition_costs(&self) -> Vec<f64> {
        self.transitions.iter().map(|t| self.op_costs[t.op]).collect()
    }

    pub fn is_goal(&self, state: usize) -> bool {
        self.goals.binary_search(&state).is_ok()
    }

    pub fn domains(&self) -> &[usize] {
        self.indexer.dims()
    }

    /// Assembles a system from explicit parts. `transitions` must be sorted by
    /// source and `goals` sorted.
    pub fn from_parts(
        domains: &[usize],
        transitions: Vec<Transition>,
        initial: usize,
        goals: Vec<usize>,
        op_costs: Vec<f64>,
    ) -> Self {
        let indexer = StateIndexer::new(domains);
        let n = indexer.count();
        assert!(transitions.windows(2).all(|w| w[0].source <= w[1].source), "transitions sorted by source");
        let mut out_offsets = vec![0usize; n + 1];
        for t in &transitions {
            out_offsets[t.source + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
        }
        TransitionSystem {
            indexer,
            transitions,
            out_offsets,
            initial,
            goals,
            op_costs,
        }
    }
}

pub fn check_state_cap(task: &Task, cap: u128) -> Result<()> {
    let states = task.num_states();
    if states > cap {
        return Err(Error::StateSpaceTooLarge { states, cap });
    }
    Ok(())
}

pub fn build_transition_system(task: &Task, state_cap: u128) -> Result<TransitionSystem> {
    check_state_cap(task, state_cap)?;
    let indexer = StateIndexer::new(&task.domain_sizes());
    let n = indexer.count();
    let mut transitions = Vec::new();
    let mut out_offsets = Vec::with_capacity(n + 1);
    let mut goals = Vec::new();
    for index in 0..n {
        out_offsets.push(transitions.len());
        let state = State(indexer.unrank(index));
        if task.is_goal(&state) {
            goals.push(index);
        }
        for (op_id, op) in task.operators.iter().enumerate() {
            if op.is_applicable(&state) {
                let next = op.apply_unchecked(&state);
                transitions.push(Transition {
                    source: index,
                    op: op_id,
                    target: indexer.rank(next.values()),
                });
            }
        }
    }
    out_offsets.push(transitions.len());
    let initial = indexer.rank(task.initial_state.values());
    Ok(TransitionSystem {
        indexer,
        transitions,
        out_offsets,
        initial,
        goals,
        op_costs: task.operators.iter().map(|o| o.cost as f64).collect(),
    })
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cheapest cost to reach a goal from every state under per-transition `costs`.
///
/// Unreachable states map to `+∞`; states that can reach a negative-cost cycle
/// from which a goal is reachable map to `−∞`.
pub fn exact_goal_distances(ts: &TransitionSystem, costs: &[f64]) -> Vec<f64> {
    assert_eq!(costs.len(), ts.transitions.len(), "one cost per transition");
    let n = ts.num_states();
    // reverse adjacency: incoming[target] lists transition indices
    let mut in_offsets = vec![0usize; n + 1];
    for t in &ts.transitions {
        in_offsets[t.target + 1] += 1;
    }
    for i in 0..n {
        in_offsets[i + 1] += in_offsets[i];
    }
    let mut fill = in_offsets.clone();
    let mut incoming = vec![0usize; ts.transitions.len()];
    for (i, t) in ts.transitions.iter().enumerate() {
        incoming[fill[t.target]] = i;
        fill[t.target] += 1;
    }

    let mut dist = vec![f64::INFINITY; n];
    for &g in &ts.goals {
        dist[g] = 0.0;
    }

    if costs.iter().all(|&c| c >= 0.0) {
        let mut heap: BinaryHeap<Entry> = ts.goals.iter().map(|&g| Entry(0.0, g)).collect();
        let mut done = vec![false; n];
        while let Some(Entry(d, s)) = heap.pop() {
            if done[s] {
                continue;
            }
            done[s] = true;
            for &ti in &incoming[in_offsets[s]..in_offsets[s + 1]] {
                let src = ts.transitions[ti].source;
                let cand = d + costs[ti];
                if cand < dist[src] {
                    dist[src] = cand;
                    heap.push(Entry(cand, src));
                }
            }
        }
        return dist;
    }

    const EPS: f64 = 1e-9;
    let mut changed = true;
    let mut rounds = 0;
    while changed && rounds < n {
        changed = false;
        rounds += 1;
        for (ti, t) in ts.transitions.iter().enumerate() {
            let cand = costs[ti] + dist[t.target];
            if cand < dist[t.source] - EPS {
                dist[t.source] = cand;
                changed = true;
            }
        }
    }
    if changed {
        let mut queue: VecDeque<usize> = VecDeque::new();
        let mut neg = vec![false; n];
        for (ti, t) in ts.transitions.iter().enumerate() {
            let cand = costs[ti] + dist[t.target];
            if cand < dist[t.source] - EPS && !neg[t.source] {
                neg[t.source] = true;
                queue.push_back(t.source);
            }
        }
        while let Some(s) = queue.pop_front() {
            for &ti in &incoming[in_offsets[s]..in_offsets[s + 1]] {
                let src = ts.transitions[ti].source;
                if !neg[src] {
                    neg[src] = true;
                    queue.push_back(src);
                }
            }
        }
        for (d, is_neg) in dist.iter_mut().zip(neg) {
            if is_neg {
                *d = f64::NEG_INFINITY;
            }
        }
    }
    dist
}

/// `h*` for every state under the task's operator costs.
pub fn goal_distances(ts: &TransitionSystem) -> Vec<f64> {
    exact_goal_distances(ts, &ts.transition_costs())
}
