//! Solver-agnostic linear programs: affine expressions, models, a solve
//! contract with an embedded simplex implementation, and CPLEX LP text I/O.

mod external;
mod format;
mod simplex;

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

pub use external::{ExternalSolver, SOLVER_CMD_ENV};
pub use format::{export_lp, parse_lp};
pub use simplex::SimplexSolver;

/// Absolute tolerance for row feasibility checks.
pub const FEASIBILITY_TOL: f64 = 1e-6;
/// Relative tolerance for comparing optimal objective values.
pub const OPTIMALITY_TOL: f64 = 1e-6;
/// Default bound magnitude for potential weights.
pub const WEIGHT_BOUND: f64 = 1e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("no value assigned to unknown {0}")]
    MissingAssignment(usize),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("LP format line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("solver failure: {0}")]
    SolverFailure(String),
}

/// `constant + Σ coefficient·unknown`; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearExpression {
    pub constant: f64,
    terms: BTreeMap<usize, f64>,
}

impl LinearExpression {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        LinearExpression {
            constant: value,
            terms: BTreeMap::new(),
        }
    }

    pub fn var(id: usize) -> Self {
        Self::term(id, 1.0)
    }

    pub fn term(id: usize, coefficient: f64) -> Self {
        let mut e = Self::zero();
        e.add_term(id, coefficient);
        e
    }

    pub fn from_terms(constant: f64, terms: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut e = Self::constant(constant);
        for (id, c) in terms {
            e.add_term(id, c);
        }
        e
    }

    pub fn add_term(&mut self, id: usize, coefficient: f64) {
        if coefficient == 0.0 {
            return;
        }
        let entry = self.terms.entry(id).or_insert(0.0);
        *entry += coefficient;
        if *entry == 0.0 {
            self.terms.remove(&id);
        }
    }

    /// `self += factor·other`
    pub fn add_scaled(&mut self, other: &LinearExpression, factor: f64) {
        self.constant += factor * other.constant;
        for (&id, &c) in &other.terms {
            self.add_term(id, factor * c);
        }
    }

    pub fn coefficient(&self, id: usize) -> f64 {
        self.terms.get(&id).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.terms.iter().map(|(&id, &c)| (id, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.terms.is_empty()
    }

    /// True when no unknown occurs.
    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_unknown(&self) -> Option<usize> {
        self.terms.keys().next_back().copied()
    }

    pub fn evaluate(&self, assignment: &HashMap<usize, f64>) -> Result<f64, LpError> {
        let mut sum = self.constant;
        for (&id, &c) in &self.terms {
            let v = assignment.get(&id).ok_or(LpError::MissingAssignment(id))?;
            sum += c * v;
        }
        Ok(sum)
    }

    /// Evaluates against a dense value vector indexed by unknown id.
    pub fn evaluate_dense(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|(&id, &c)| c * values[id]).sum::<f64>()
    }

    /// Renumbers unknowns through `map`.
    pub fn remap(&self, map: impl Fn(usize) -> usize) -> Self {
        Self::from_terms(self.constant, self.terms().map(|(id, c)| (map(id), c)))
    }
}

pub fn evaluate(e: &LinearExpression, assignment: &HashMap<usize, f64>) -> Result<f64, LpError> {
    e.evaluate(assignment)
}

impl Add for LinearExpression {
    type Output = LinearExpression;

    fn add(mut self, rhs: LinearExpression) -> LinearExpression {
        self.add_scaled(&rhs, 1.0);
        self
    }
}

impl Sub for LinearExpression {
    type Output = LinearExpression;

    fn sub(mut self, rhs: LinearExpression) -> LinearExpression {
        self.add_scaled(&rhs, -1.0);
        self
    }
}

impl Mul<f64> for LinearExpression {
    type Output = LinearExpression;

    fn mul(self, factor: f64) -> LinearExpression {
        let mut e = LinearExpression::zero();
        e.add_scaled(&self, factor);
        e
    }
}

impl Neg for LinearExpression {
    type Output = LinearExpression;

    fn neg(self) -> LinearExpression {
        self * -1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
            Relation::Ge => lhs >= rhs - tol,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Unknown {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

/// `expr relation rhs`; the expression's constant is always folded into `rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub name: Option<String>,
    pub expr: LinearExpression,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpModel {
    pub unknowns: Vec<Unknown>,
    pub rows: Vec<Row>,
    pub sense: Sense,
    pub objective: LinearExpression,
}

impl Default for LpModel {
    fn default() -> Self {
        LpModel {
            unknowns: Vec::new(),
            rows: Vec::new(),
            sense: Sense::Maximize,
            objective: LinearExpression::zero(),
        }
    }
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_unknown(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> usize {
        let name = name.into();
        debug_assert!(valid_name(&name), "invalid LP name {name:?}");
        self.unknowns.push(Unknown { name, lower, upper });
        self.unknowns.len() - 1
    }

    pub fn add_free(&mut self, name: impl Into<String>) -> usize {
        self.add_unknown(name, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn add_row(&mut self, expr: LinearExpression, relation: Relation, rhs: f64) -> usize {
        self.push_row(None, expr, relation, rhs)
    }

    pub fn add_named_row(
        &mut self,
        name: impl Into<String>,
        expr: LinearExpression,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.push_row(Some(name.into()), expr, relation, rhs)
    }

    fn push_row(
        &mut self,
        name: Option<String>,
        mut expr: LinearExpression,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        let rhs = rhs - expr.constant;
        expr.constant = 0.0;
        self.rows.push(Row {
            name,
            expr,
            relation,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn set_objective(&mut self, sense: Sense, objective: LinearExpression) {
        self.sense = sense;
        self.objective = objective;
    }

    pub fn num_unknowns(&self) -> usize {
        self.unknowns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn unknown_index(&self, name: &str) -> Option<usize> {
        self.unknowns.iter().position(|u| u.name == name)
    }

    pub fn row_name(&self, index: usize) -> String {
        self.rows[index]
            .name
            .clone()
            .unwrap_or_else(|| format!("c{}", index + 1))
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.unknowns.len();
        for u in &self.unknowns {
            if u.lower.is_nan() || u.upper.is_nan() || u.lower > u.upper || u.lower == f64::INFINITY
                || u.upper == f64::NEG_INFINITY
            {
                return Err(LpError::InvalidModel(format!(
                    "bounds [{}, {}] of {}",
                    u.lower, u.upper, u.name
                )));
            }
        }
        let check = |e: &LinearExpression, what: &str| match e.max_unknown() {
            Some(id) if id >= n => Err(LpError::InvalidModel(format!(
                "{what} references undeclared unknown {id}"
            ))),
            _ => Ok(()),
        };
        for (i, row) in self.rows.iter().enumerate() {
            check(&row.expr, &self.row_name(i))?;
            if !row.rhs.is_finite() {
                return Err(LpError::InvalidModel(format!("row {} has rhs {}", i, row.rhs)));
            }
        }
        check(&self.objective, "objective")
    }

    /// Largest violation of any row or bound by `values` (0 when feasible).
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for row in &self.rows {
            let lhs = row.expr.evaluate_dense(values);
            let v = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (u, &x) in self.unknowns.iter().zip(values) {
            worst = worst.max(u.lower - x).max(x - u.upper);
        }
        worst
    }

    /// Index of the first row violated beyond `tol`.
    pub fn first_violated_row(&self, values: &[f64], tol: f64) -> Option<usize> {
        self.rows
            .iter()
            .position(|r| !r.relation.holds(r.expr.evaluate_dense(values), r.rhs, tol))
    }
}

pub(crate) fn valid_name(name: &str) -> bool {
    const EXTRA: &str = "!\"#$%&()/,.;?@_`'{}|~";
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || (EXTRA.contains(c) && c != '.') => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || EXTRA.contains(c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// One value per unknown; empty unless optimal.
    pub values: Vec<f64>,
    pub objective_value: Option<f64>,
}

impl LpSolution {
    pub fn infeasible() -> Self {
        LpSolution {
            status: LpStatus::Infeasible,
            values: Vec::new(),
            objective_value: None,
        }
    }

    pub fn unbounded() -> Self {
        LpSolution {
            status: LpStatus::Unbounded,
            values: Vec::new(),
            objective_value: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn value(&self, id: usize) -> f64 {
        self.values[id]
    }
}

pub trait LpSolver {
    fn solve(&self, model: &LpModel) -> Result<LpSolution, LpError>;
}

/// Solves with the embedded simplex implementation.
pub fn solve(model: &LpModel) -> Result<LpSolution, LpError> {
    SimplexSolver::default().solve(model)
}

/// The external adapter when `POTPLAN_LP_SOLVER_CMD` is set, else the embedded simplex.
pub fn solver_from_env() -> Box<dyn LpSolver> {
    match std::env::var(SOLVER_CMD_ENV) {
        Ok(cmd) if !cmd.trim().is_empty() => Box::new(ExternalSolver::new(cmd)),
        _ => Box::new(SimplexSolver::default()),
    }
}

/// `|a − b| ≤ tol·max(1, |a|, |b|)`
pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}
