//! SAS+ planning tasks: variables, partial assignments, states and operators.

use std::fmt;

use crate::error::{Error, Result};

/// A fact `⟨var, value⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub var: usize,
    pub value: usize,
}

impl Fact {
    pub fn new(var: usize, value: usize) -> Self {
        Fact { var, value }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub value_names: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, value_names: Vec<String>) -> Self {
        Variable {
            name: name.into(),
            value_names,
        }
    }

    /// Variable with values named `0..domain_size`.
    pub fn with_domain(name: impl Into<String>, domain_size: usize) -> Self {
        Variable::new(name, (0..domain_size).map(|v| v.to_string()).collect())
    }

    pub fn domain_size(&self) -> usize {
        self.value_names.len()
    }
}

/// A partial variable assignment, kept sorted by variable with at most one
/// binding per variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialAssignment(Vec<Fact>);

impl PartialAssignment {
    pub fn new(facts: impl IntoIterator<Item = Fact>) -> Result<Self> {
        let mut facts: Vec<Fact> = facts.into_iter().collect();
        facts.sort();
        for pair in facts.windows(2) {
            if pair[0].var == pair[1].var {
                return Err(Error::InvalidTask(format!(
                    "variable {} bound twice in a partial assignment",
                    pair[0].var
                )));
            }
        }
        Ok(PartialAssignment(facts))
    }

    /// Builds from `(var, value)` pairs. Panics on a repeated variable.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Self {
        Self::new(pairs.iter().map(|&(var, value)| Fact { var, value }))
            .expect("repeated variable in partial assignment")
    }

    pub fn empty() -> Self {
        PartialAssignment(Vec::new())
    }

    pub fn get(&self, var: usize) -> Option<usize> {
        self.0
            .binary_search_by_key(&var, |f| f.var)
            .ok()
            .map(|i| self.0[i].value)
    }

    pub fn contains_var(&self, var: usize) -> bool {
        self.get(var).is_some()
    }

    /// Sets `var` to `value`, replacing an existing binding.
    pub fn set(&mut self, var: usize, value: usize) {
        match self.0.binary_search_by_key(&var, |f| f.var) {
            Ok(i) => self.0[i].value = value,
            Err(i) => self.0.insert(i, Fact { var, value }),
        }
    }

    pub fn remove(&mut self, var: usize) {
        if let Ok(i) = self.0.binary_search_by_key(&var, |f| f.var) {
            self.0.remove(i);
        }
    }

    pub fn facts(&self) -> &[Fact] {
        &self.0
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|f| f.var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True iff `state` agrees with every binding.
    pub fn is_consistent_with(&self, state: &State) -> bool {
        self.0.iter().all(|f| state[f.var] == f.value)
    }
}

/// A full assignment, one value index per variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(pub Vec<usize>);

impl State {
    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn holds(&self, fact: Fact) -> bool {
        self.0[fact.var] == fact.value
    }

    pub fn to_partial(&self) -> PartialAssignment {
        PartialAssignment(
            self.0
                .iter()
                .enumerate()
                .map(|(var, &value)| Fact { var, value })
                .collect(),
        )
    }
}

impl std::ops::Index<usize> for State {
    type Output = usize;

    fn index(&self, var: usize) -> &usize {
        &self.0[var]
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operator {
    pub name: String,
    pub pre: PartialAssignment,
    pub eff: PartialAssignment,
    pub cost: u32,
}

impl Operator {
    pub fn new(name: impl Into<String>, pre: PartialAssignment, eff: PartialAssignment, cost: u32) -> Self {
        Operator {
            name: name.into(),
            pre,
            eff,
            cost,
        }
    }

    /// `vars(pre) ∪ vars(eff)`, sorted.
    pub fn vars(&self) -> Vec<usize> {
        let mut vars: Vec<usize> = self.pre.vars().chain(self.eff.vars()).collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    pub fn mentions(&self, var: usize) -> bool {
        self.pre.contains_var(var) || self.eff.contains_var(var)
    }

    pub fn is_applicable(&self, state: &State) -> bool {
        self.pre.is_consistent_with(state)
    }

    /// Result of applying the operator, without the applicability check.
    pub fn apply_unchecked(&self, state: &State) -> State {
        let mut values = state.0.clone();
        for f in self.eff.facts() {
            values[f.var] = f.value;
        }
        State(values)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub variables: Vec<Variable>,
    pub operators: Vec<Operator>,
    pub initial_state: State,
    pub goal: PartialAssignment,
    /// Mirrors the `begin_metric` flag of the input; costs are taken as written either way.
    pub use_metric: bool,
}

impl Task {
    /// Validates the invariants: facts in range, total initial state.
    pub fn new(
        variables: Vec<Variable>,
        operators: Vec<Operator>,
        initial_state: State,
        goal: PartialAssignment,
    ) -> Result<Self> {
        let task = Task {
            variables,
            operators,
            initial_state,
            goal,
            use_metric: true,
        };
        task.validate()?;
        Ok(task)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.variables.iter().enumerate() {
            if v.domain_size() == 0 {
                return Err(Error::InvalidTask(format!("variable {i} has an empty domain")));
            }
        }
        if self.initial_state.len() != self.variables.len() {
            return Err(Error::InvalidTask(format!(
                "initial state assigns {} of {} variables",
                self.initial_state.len(),
                self.variables.len()
            )));
        }
        for (var, &value) in self.initial_state.0.iter().enumerate() {
            self.check_fact(Fact { var, value })?;
        }
        for f in self.goal.facts() {
            self.check_fact(*f)?;
        }
        for op in &self.operators {
            for f in op.pre.facts().iter().chain(op.eff.facts()) {
                self.check_fact(*f)?;
            }
        }
        Ok(())
    }

    pub fn check_fact(&self, fact: Fact) -> Result<()> {
        let var = self.variables.get(fact.var).ok_or_else(|| {
            Error::InvalidTask(format!("reference to unknown variable {}", fact.var))
        })?;
        if fact.value >= var.domain_size() {
            return Err(Error::OutOfRange {
                var: fact.var,
                value: fact.value,
                domain_size: var.domain_size(),
            });
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::domain_size).collect()
    }

    pub fn max_domain_size(&self) -> usize {
        self.variables.iter().map(Variable::domain_size).max().unwrap_or(0)
    }

    /// Product of the domain sizes (saturating).
    pub fn num_states(&self) -> u128 {
        self.variables
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.domain_size() as u128))
    }

    /// The single goal state, if the goal is total.
    pub fn goal_state(&self) -> Option<State> {
        if self.goal.len() == self.variables.len() {
            Some(State(self.goal.facts().iter().map(|f| f.value).collect()))
        } else {
            None
        }
    }

    pub fn is_goal(&self, state: &State) -> bool {
        self.goal.is_consistent_with(state)
    }

    pub fn fact_name(&self, fact: Fact) -> String {
        let var = &self.variables[fact.var];
        format!("{}={}", var.name, var.value_names[fact.value])
    }

    pub fn operator_index(&self, name: &str) -> Option<usize> {
        self.operators.iter().position(|o| o.name == name)
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Resolves `name=value` text (names first, then numeric indices).
    pub fn parse_fact(&self, text: &str) -> Result<Fact> {
        let (lhs, rhs) = text
            .split_once('=')
            .ok_or_else(|| Error::InvalidFeature(format!("expected var=value, got `{text}`")))?;
        let (lhs, rhs) = (lhs.trim(), rhs.trim());
        let var = self
            .variable_index(lhs)
            .or_else(|| lhs.parse::<usize>().ok().filter(|&v| v < self.num_vars()))
            .ok_or_else(|| Error::InvalidFeature(format!("unknown variable `{lhs}`")))?;
        let names = &self.variables[var].value_names;
        let value = names
            .iter()
            .position(|n| n == rhs)
            .or_else(|| rhs.parse::<usize>().ok().filter(|&v| v < names.len()))
            .ok_or_else(|| Error::InvalidFeature(format!("unknown value `{rhs}` of `{lhs}`")))?;
        Ok(Fact { var, value })
    }
}

/// `s⟦o⟧`; fails when `o` is not applicable in `s`.
pub fn successor(state: &State, op: &Operator) -> Result<State> {
    if !op.is_applicable(state) {
        return Err(Error::NotApplicable(op.name.clone()));
    }
    Ok(op.apply_unchecked(state))
}

/// Mixed-radix ranking of full states; variable 0 is the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateIndexer {
    domains: Vec<usize>,
    strides: Vec<usize>,
    count: usize,
}

impl StateIndexer {
    pub fn new(domains: &[usize]) -> Self {
        let mut strides = vec![0; domains.len()];
        let mut count = 1usize;
        for i in (0..domains.len()).rev() {
            strides[i] = count;
            count = count.saturating_mul(domains[i]);
        }
        StateIndexer {
            domains: domains.to_vec(),
            strides,
            count,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dims(&self) -> &[usize] {
        &self.domains
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn rank(&self, values: &[usize]) -> usize {
        values.iter().zip(&self.strides).map(|(v, s)| v * s).sum()
    }

    pub fn unrank(&self, mut index: usize) -> Vec<usize> {
        let mut values = vec![0; self.domains.len()];
        for (i, stride) in self.strides.iter().enumerate() {
            values[i] = index / stride;
            index %= stride;
        }
        values
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::toy1;
    use super::*;

    #[test]
    fn successor_applies_effect() {
        let task = toy1();
        let s = successor(&State(vec![0, 0]), &task.operators[0]).unwrap();
        assert_eq!(s, State(vec![1, 0]));
    }

    #[test]
    fn successor_rejects_inapplicable() {
        let task = toy1();
        assert!(matches!(
            successor(&State(vec![1, 0]), &task.operators[0]),
            Err(Error::NotApplicable(_))
        ));
        assert!(matches!(
            successor(&State(vec![0, 1]), &task.operators[1]),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn partial_assignment_rejects_repeated_variable() {
        assert!(PartialAssignment::new([Fact::new(0, 0), Fact::new(0, 1)]).is_err());
    }

    #[test]
    fn task_rejects_out_of_range_goal() {
        let mut task = toy1();
        task.goal = PartialAssignment::from_pairs(&[(0, 2)]);
        assert!(matches!(task.validate(), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn indexer_round_trips() {
        let idx = StateIndexer::new(&[2, 3, 4]);
        assert_eq!(idx.count(), 24);
        for i in 0..24 {
            assert_eq!(idx.rank(&idx.unrank(i)), i);
        }
        assert_eq!(idx.rank(&[1, 0, 0]), 12);
    }

    #[test]
    fn parse_fact_by_name_and_index() {
        let task = toy1();
        assert_eq!(task.parse_fact("X=1").unwrap(), Fact::new(0, 1));
        assert_eq!(task.parse_fact(" Y = 0 ").unwrap(), Fact::new(1, 0));
        assert!(task.parse_fact("Z=0").is_err());
        assert!(task.parse_fact("X=5").is_err());
    }
}
