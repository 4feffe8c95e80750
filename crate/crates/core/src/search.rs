//! A* search and exhaustive heuristic validators.
//!
//! The open list is ordered by `f`, then lower `h`, then insertion order, so
//! expansion counts are reproducible.

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::task::{State, Task};
use crate::transition::{build_transition_system, goal_distances, TransitionSystem};

/// Slack used when comparing `f` values against the plan cost.
const LAYER_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub plan: Option<Vec<usize>>,
    pub cost: f64,
    pub expansions: usize,
    /// Expansions with `f` below the final plan cost.
    pub expansions_before_last_f_layer: usize,
    pub evaluated: usize,
    pub wall_time: f64,
}

#[derive(Debug)]
struct OpenEntry {
    f: f64,
    h: f64,
    seq: u64,
    g: f64,
    node: usize,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl Ord for OpenEntry {
    // BinaryHeap is a max-heap: the preferred entry compares greatest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Open list with the fixed tie-breaking policy: lowest `f`, then lowest `h`,
/// then first inserted.
#[derive(Debug, Default)]
pub struct OpenList {
    heap: BinaryHeap<OpenEntry>,
    next_seq: u64,
}

impl OpenList {
    pub fn push(&mut self, node: usize, g: f64, h: f64) {
        self.heap.push(OpenEntry {
            f: g + h,
            h,
            seq: self.next_seq,
            g,
            node,
        });
        self.next_seq += 1;
    }

    /// Returns `(node, g, f)`.
    pub fn pop(&mut self) -> Option<(usize, f64, f64)> {
        self.heap.pop().map(|e| (e.node, e.g, e.f))
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

struct Node {
    state: State,
    g: f64,
    h: f64,
    parent: Option<(usize, usize)>,
}

/// A* from the initial state with duplicate detection and reopening. States
/// with infinite heuristic value are pruned.
pub fn astar(task: &Task, heuristic: &dyn Fn(&State) -> f64) -> Result<SearchResult> {
    let start = Instant::now();
    let mut nodes: Vec<Node> = Vec::new();
    let mut ids: HashMap<State, usize> = HashMap::new();
    let mut open = OpenList::default();
    let mut expanded_f: Vec<f64> = Vec::new();

    let h0 = heuristic(&task.initial_state);
    let mut evaluated = 1;
    if h0.is_finite() {
        nodes.push(Node {
            state: task.initial_state.clone(),
            g: 0.0,
            h: h0,
            parent: None,
        });
        ids.insert(task.initial_state.clone(), 0);
        open.push(0, 0.0, h0);
    }

    while let Some((id, g, f)) = open.pop() {
        if g > nodes[id].g {
            continue;
        }
        if task.is_goal(&nodes[id].state) {
            let mut plan = Vec::new();
            let mut cur = id;
            while let Some((prev, op)) = nodes[cur].parent {
                plan.push(op);
                cur = prev;
            }
            plan.reverse();
            let cost = nodes[id].g;
            let before = expanded_f.iter().filter(|&&x| x < cost - LAYER_TOL).count();
            return Ok(SearchResult {
                plan: Some(plan),
                cost,
                expansions: expanded_f.len(),
                expansions_before_last_f_layer: before,
                evaluated,
                wall_time: start.elapsed().as_secs_f64(),
            });
        }
        expanded_f.push(f);
        let state = nodes[id].state.clone();
        for (op_id, op) in task.operators.iter().enumerate() {
            if !op.is_applicable(&state) {
                continue;
            }
            let next = op.apply_unchecked(&state);
            let next_g = g + op.cost as f64;
            match ids.entry(next) {
                Entry::Occupied(e) => {
                    let nid = *e.get();
                    if next_g < nodes[nid].g {
                        nodes[nid].g = next_g;
                        nodes[nid].parent = Some((id, op_id));
                        let h = nodes[nid].h;
                        open.push(nid, next_g, h);
                    }
                }
                Entry::Vacant(e) => {
                    let h = heuristic(e.key());
                    evaluated += 1;
                    if !h.is_finite() {
                        continue;
                    }
                    let nid = nodes.len();
                    nodes.push(Node {
                        state: e.key().clone(),
                        g: next_g,
                        h,
                        parent: Some((id, op_id)),
                    });
                    e.insert(nid);
                    open.push(nid, next_g, h);
                }
            }
        }
    }
    Err(Error::NoPlan)
}

/// A violation found by [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Counterexample {
    /// A goal state with positive heuristic value.
    GoalState(State),
    /// `h(s) > cost(o) + h(s⟦o⟧)`.
    Transition { state: State, op: usize },
    /// `h(s) > h*(s)`.
    Overestimate(State),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub goal_aware: bool,
    pub consistent: bool,
    pub admissible: bool,
    /// The first violation, checking consistency, then goal-awareness, then
    /// admissibility.
    pub counterexample: Option<Counterexample>,
}

impl ValidationReport {
    pub fn all_hold(&self) -> bool {
        self.goal_aware && self.consistent && self.admissible
    }
}

/// `a ≤ b` up to `10⁻⁶` relative to the magnitudes involved.
fn le_tol(a: f64, b: f64) -> bool {
    if a <= b {
        return true;
    }
    let scale = 1f64.max(a.abs()).max(b.abs());
    a - b <= 1e-6 * scale
}

/// Exhaustive check of goal-awareness, consistency and admissibility over
/// every state of the task.
pub fn validate(task: &Task, heuristic: &dyn Fn(&State) -> f64, state_cap: u128) -> Result<ValidationReport> {
    let ts = build_transition_system(task, state_cap)?;
    Ok(validate_on(&ts, heuristic))
}

/// [`validate`] on a prebuilt transition system.
pub fn validate_on(ts: &TransitionSystem, heuristic: &dyn Fn(&State) -> f64) -> ValidationReport {
    let h: Vec<f64> = ts.states().map(|s| heuristic(&s)).collect();
    let h_star = goal_distances(ts);
    let mut counterexample = None;

    let bad_transition = ts
        .transitions
        .iter()
        .find(|t| !le_tol(h[t.source], ts.op_costs[t.op] + h[t.target]));
    if let Some(t) = bad_transition {
        counterexample = Some(Counterexample::Transition {
            state: ts.state(t.source),
            op: t.op,
        });
    }
    let bad_goal = ts.goals.iter().copied().find(|&g| !le_tol(h[g], 0.0));
    if let (None, Some(g)) = (&counterexample, bad_goal) {
        counterexample = Some(Counterexample::GoalState(ts.state(g)));
    }
    let bad_state = (0..ts.num_states()).find(|&s| !le_tol(h[s], h_star[s]));
    if let (None, Some(s)) = (&counterexample, bad_state) {
        counterexample = Some(Counterexample::Overestimate(ts.state(s)));
    }
    ValidationReport {
        goal_aware: bad_goal.is_none(),
        consistent: bad_transition.is_none(),
        admissible: bad_state.is_none(),
        counterexample,
    }
}
