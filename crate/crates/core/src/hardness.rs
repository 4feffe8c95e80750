//! Reduction from graph 3-coloring to consistency testing of a dimension-3
//! potential heuristic: the potential is consistent iff the graph is not
//! 3-colorable.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::feature::{evaluate_potential, Feature, FeatureSet, WeightFunction};
use crate::task::{Operator, PartialAssignment, State, Task, Variable};

pub const COLORS: [&str; 3] = ["red", "green", "blue"];

/// Largest `3^n` accepted by [`is_3colorable`].
pub const COLORING_CAP: u64 = 1_000_000;

/// A simple undirected graph; edges are stored as `(u, v)` with `u < v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(vertex_count: usize) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidGraph("a graph needs at least one vertex".into()));
        }
        Ok(Graph {
            vertex_count,
            edges: BTreeSet::new(),
        })
    }

    pub fn with_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::new(vertex_count)?;
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut g = Graph::new(n)?;
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v)?;
            }
        }
        Ok(g)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        let mut g = Graph::new(n)?;
        for u in 0..n {
            g.add_edge(u, (u + 1) % n)?;
        }
        Ok(g)
    }

    /// Erdős–Rényi graph: each pair is an edge with probability `p`.
    pub fn random(n: usize, p: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = Graph::new(n)?;
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    g.add_edge(u, v)?;
                }
            }
        }
        Ok(g)
    }

    /// Adding an existing edge is a no-op; self-loops are rejected.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.vertex_count || v >= self.vertex_count {
            return Err(Error::InvalidGraph(format!("edge ({u}, {v}) has an endpoint out of range")));
        }
        if u == v {
            return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
        }
        self.edges.insert((u.min(v), u.max(v)));
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Parses the DIMACS edge format (`c` comments, `p edge n m`, `e u v`
    /// with 1-based vertices). Duplicate edges are merged.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut graph: Option<Graph> = None;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let malformed = |message: &str| Error::Malformed {
                line: line_no,
                message: message.to_string(),
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens.first().copied() {
                None | Some("c") => {}
                Some("p") => {
                    if graph.is_some() {
                        return Err(malformed("second problem line"));
                    }
                    if tokens.len() != 4 || (tokens[1] != "edge" && tokens[1] != "col") {
                        return Err(malformed("expected `p edge <vertices> <edges>`"));
                    }
                    let n: usize = tokens[2].parse().map_err(|_| malformed("bad vertex count"))?;
                    tokens[3].parse::<usize>().map_err(|_| malformed("bad edge count"))?;
                    graph = Some(Graph::new(n).map_err(|e| malformed(&e.to_string()))?);
                }
                Some("e") => {
                    let g = graph.as_mut().ok_or_else(|| malformed("edge before problem line"))?;
                    if tokens.len() != 3 {
                        return Err(malformed("expected `e <u> <v>`"));
                    }
                    let parse = |t: &str| match t.parse::<usize>() {
                        Ok(x) if x >= 1 => Ok(x - 1),
                        _ => Err(malformed("vertices are numbered from 1")),
                    };
                    let (u, v) = (parse(tokens[1])?, parse(tokens[2])?);
                    g.add_edge(u, v).map_err(|e| malformed(&e.to_string()))?;
                }
                Some(other) => return Err(malformed(&format!("unknown line type {other:?}"))),
            }
        }
        graph.ok_or(Error::Malformed {
            line: text.lines().count(),
            message: "missing problem line".into(),
        })
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p edge {} {}\n", self.vertex_count, self.edges.len());
        for (u, v) in self.edges() {
            writeln!(out, "e {} {}", u + 1, v + 1).unwrap();
        }
        out
    }
}

/// Brute force over all colorings.
pub fn is_3colorable(g: &Graph) -> Result<bool> {
    let n = g.vertex_count();
    let total = 3u64.checked_pow(n as u32).filter(|&t| t <= COLORING_CAP);
    let Some(total) = total else {
        return Err(Error::TooLarge(format!("3^{n} colorings exceed {COLORING_CAP}")));
    };
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let mut colors = vec![0usize; n];
    for mut code in 0..total {
        for c in colors.iter_mut() {
            *c = (code % 3) as usize;
            code /= 3;
        }
        if edges.iter().all(|&(u, v)| colors[u] != colors[v]) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The planning task and potential built from a graph. Variable `v < n` is
/// the color of vertex `v`, variable `n` is the master switch `M`.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub task: Task,
    pub features: FeatureSet,
    pub weights: WeightFunction,
    pub master: usize,
}

pub fn reduce_3col(g: &Graph) -> Reduction {
    let n = g.vertex_count();
    let master = n;
    let mut variables: Vec<Variable> = (0..n)
        .map(|v| Variable::new(format!("C{v}"), COLORS.iter().map(|c| c.to_string()).collect()))
        .collect();
    variables.push(Variable::new("M", vec!["0".into(), "1".into()]));

    let mut operators = Vec::with_capacity(6 * n + 1);
    for v in 0..n {
        for c in 0..3 {
            for c2 in (0..3).filter(|&c2| c2 != c) {
                operators.push(Operator::new(
                    format!("recolor_{v}_{}_{}", COLORS[c], COLORS[c2]),
                    PartialAssignment::from_pairs(&[(v, c), (master, 0)]),
                    PartialAssignment::from_pairs(&[(v, c2), (master, 0)]),
                    0,
                ));
            }
        }
    }
    operators.push(Operator::new(
        "switch_master",
        PartialAssignment::from_pairs(&[(master, 0)]),
        PartialAssignment::from_pairs(&[(master, 1)]),
        0,
    ));

    let mut init = vec![0; n + 1];
    let task_init = State(init.clone());
    init[master] = 1;
    let goal = State(init).to_partial();
    let task = Task::new(variables, operators, task_init, goal).expect("reduction task is valid");

    let mut features = vec![Feature::from_pairs(&[(master, 1)])];
    let mut weights = vec![g.num_edges() as f64 - 1.0];
    for (u, v) in g.edges() {
        for m in 0..2 {
            for cu in 0..3 {
                for cv in 0..3 {
                    features.push(Feature::from_pairs(&[(u, cu), (v, cv), (master, m)]));
                    weights.push(if m == 1 && cu != cv { -1.0 } else { 0.0 });
                }
            }
        }
    }
    Reduction {
        task,
        features: FeatureSet::new(features).expect("reduction features are distinct"),
        weights: WeightFunction(weights),
        master,
    }
}

pub fn phi_of_state(r: &Reduction, s: &State) -> f64 {
    evaluate_potential(&r.features, &r.weights, s)
}
