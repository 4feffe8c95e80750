//! Features (fact conjunctions), weight functions, potentials and the
//! per-operator feature classification.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::task::{Fact, Operator, PartialAssignment, State, Task};

/// A conjunction of facts over pairwise distinct variables, sorted by variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Feature(Vec<Fact>);

impl Feature {
    pub fn new(facts: impl IntoIterator<Item = Fact>) -> Result<Self> {
        let mut facts: Vec<Fact> = facts.into_iter().collect();
        if facts.is_empty() {
            return Err(Error::InvalidFeature("empty conjunction".into()));
        }
        facts.sort();
        for pair in facts.windows(2) {
            if pair[0].var == pair[1].var {
                return Err(Error::InvalidFeature(format!(
                    "conjunction mentions variable {} twice",
                    pair[0].var
                )));
            }
        }
        Ok(Feature(facts))
    }

    pub fn from_pairs(pairs: &[(usize, usize)]) -> Self {
        Feature::new(pairs.iter().map(|&(v, x)| Fact::new(v, x))).expect("valid feature")
    }

    pub fn facts(&self) -> &[Fact] {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|f| f.var)
    }

    pub fn mentions(&self, var: usize) -> bool {
        self.0.iter().any(|f| f.var == var)
    }

    pub fn value_of(&self, var: usize) -> Option<usize> {
        self.0.iter().find(|f| f.var == var).map(|f| f.value)
    }

    /// `s ⊨ f`
    pub fn holds_in(&self, state: &State) -> bool {
        self.0.iter().all(|&f| state.holds(f))
    }

    /// `p ⊨ f` for a partial assignment: every fact of `f` is bound in `p`.
    pub fn entailed_by(&self, partial: &PartialAssignment) -> bool {
        self.0.iter().all(|f| partial.get(f.var) == Some(f.value))
    }

    /// `var=value & var=value` with the task's names.
    pub fn display(&self, task: &Task) -> String {
        self.0
            .iter()
            .map(|&f| task.fact_name(f))
            .collect::<Vec<_>>()
            .join(" & ")
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, fact) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " & ")?;
            }
            write!(f, "{}={}", fact.var, fact.value)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureSet {
    features: Vec<Feature>,
    index: HashMap<Feature, usize>,
}

impl FeatureSet {
    /// Rejects duplicate features.
    pub fn new(features: Vec<Feature>) -> Result<Self> {
        let mut index = HashMap::with_capacity(features.len());
        for (i, f) in features.iter().enumerate() {
            if index.insert(f.clone(), i).is_some() {
                return Err(Error::InvalidFeature(format!("duplicate feature {f}")));
            }
        }
        Ok(FeatureSet { features, index })
    }

    /// All conjunctions of up to `max_size` facts over distinct variables,
    /// ordered by size and then lexicographically.
    pub fn all_up_to(task: &Task, max_size: usize) -> Self {
        let domains = task.domain_sizes();
        let mut features = Vec::new();
        for size in 1..=max_size.min(domains.len()) {
            let mut vars = Vec::with_capacity(size);
            enumerate_var_subsets(domains.len(), size, 0, &mut vars, &mut |vars| {
                let mut values = vec![0usize; vars.len()];
                loop {
                    features.push(Feature(
                        vars.iter().zip(&values).map(|(&v, &x)| Fact::new(v, x)).collect(),
                    ));
                    let mut i = vars.len();
                    loop {
                        if i == 0 {
                            return;
                        }
                        i -= 1;
                        values[i] += 1;
                        if values[i] < domains[vars[i]] {
                            break;
                        }
                        values[i] = 0;
                    }
                }
            });
        }
        FeatureSet::new(features).expect("generated features are distinct")
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn get(&self, i: usize) -> &Feature {
        &self.features[i]
    }

    pub fn index_of(&self, feature: &Feature) -> Option<usize> {
        self.index.get(feature).copied()
    }

    /// Size of a largest feature (0 for the empty set).
    pub fn dimension(&self) -> usize {
        self.features.iter().map(Feature::size).max().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Feature)> {
        self.features.iter().enumerate()
    }

    pub fn check_against(&self, task: &Task) -> Result<()> {
        for f in &self.features {
            for &fact in f.facts() {
                task.check_fact(fact)
                    .map_err(|e| Error::InvalidFeature(format!("{f}: {e}")))?;
            }
        }
        Ok(())
    }
}

fn enumerate_var_subsets(
    n: usize,
    size: usize,
    start: usize,
    current: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if current.len() == size {
        emit(current);
        return;
    }
    for v in start..n {
        current.push(v);
        enumerate_var_subsets(n, size, v + 1, current, emit);
        current.pop();
    }
}

/// Features for a task: all conjunctions up to `dimension`, or exactly the
/// explicit list (validated) when one is given.
pub fn generate_features(
    task: &Task,
    dimension: usize,
    explicit: Option<&[Vec<Fact>]>,
) -> Result<FeatureSet> {
    if dimension == 0 {
        return Err(Error::InvalidFeature("dimension must be at least 1".into()));
    }
    match explicit {
        None => Ok(FeatureSet::all_up_to(task, dimension)),
        Some(list) => {
            let features = list
                .iter()
                .map(|facts| Feature::new(facts.iter().copied()))
                .collect::<Result<Vec<_>>>()?;
            let set = FeatureSet::new(features)?;
            set.check_against(task)?;
            Ok(set)
        }
    }
}

/// Parses one conjunction per line (`var=val & var=val`); blank lines and
/// `#` comments are skipped.
pub fn parse_feature_list(task: &Task, text: &str) -> Result<Vec<Vec<Fact>>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|line| line.split('&').map(|part| task.parse_fact(part)).collect())
        .collect()
}

pub fn parse_feature(task: &Task, text: &str) -> Result<Feature> {
    let facts = text
        .split('&')
        .map(|part| task.parse_fact(part))
        .collect::<Result<Vec<_>>>()?;
    Feature::new(facts)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunction(pub Vec<f64>);

impl WeightFunction {
    pub fn zeros(fs: &FeatureSet) -> Self {
        WeightFunction(vec![0.0; fs.len()])
    }

    pub fn weight(&self, feature: usize) -> f64 {
        self.0[feature]
    }
}

/// `φ(s) = Σ_f w(f)·[s ⊨ f]`
pub fn evaluate_potential(fs: &FeatureSet, w: &WeightFunction, state: &State) -> f64 {
    fs.iter()
        .filter(|(_, f)| f.holds_in(state))
        .map(|(i, _)| w.weight(i))
        .sum()
}

/// Potential evaluator indexed by each feature's first fact, so evaluation
/// only touches features whose first fact holds.
#[derive(Clone, Debug)]
pub struct PotentialFunction {
    fact_offsets: Vec<usize>,
    buckets: Vec<Vec<(Vec<Fact>, f64)>>,
    constant: f64,
}

impl PotentialFunction {
    pub fn new(task: &Task, fs: &FeatureSet, w: &WeightFunction) -> Self {
        let mut fact_offsets = Vec::with_capacity(task.num_vars());
        let mut total = 0;
        for v in &task.variables {
            fact_offsets.push(total);
            total += v.domain_size();
        }
        let mut buckets = vec![Vec::new(); total];
        for (i, f) in fs.iter() {
            let weight = w.weight(i);
            if weight == 0.0 {
                continue;
            }
            let first = f.facts()[0];
            buckets[fact_offsets[first.var] + first.value].push((f.facts()[1..].to_vec(), weight));
        }
        PotentialFunction {
            fact_offsets,
            buckets,
            constant: 0.0,
        }
    }

    /// Adds a state-independent offset to every value.
    pub fn with_offset(mut self, offset: f64) -> Self {
        self.constant = offset;
        self
    }

    pub fn evaluate(&self, state: &State) -> f64 {
        let mut sum = self.constant;
        for (var, &value) in state.values().iter().enumerate() {
            for (rest, weight) in &self.buckets[self.fact_offsets[var] + value] {
                if rest.iter().all(|&f| state.holds(f)) {
                    sum += weight;
                }
            }
        }
        sum
    }
}

/// The irrelevant / context-independent / context-dependent split of a
/// feature set with respect to one operator.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OperatorPartition {
    pub irrelevant: Vec<usize>,
    pub context_independent: Vec<usize>,
    pub context_dependent: Vec<usize>,
}

pub fn classify_features(fs: &FeatureSet, op: &Operator) -> OperatorPartition {
    let mut part = OperatorPartition::default();
    for (i, f) in fs.iter() {
        let inside = f.vars().filter(|&v| op.mentions(v)).count();
        if inside == 0 {
            part.irrelevant.push(i);
        } else if inside == f.size() {
            part.context_independent.push(i);
        } else {
            part.context_dependent.push(i);
        }
    }
    part
}

/// `Δ_o(f, s) = [s ⊨ f] − [s⟦o⟧ ⊨ f]`
pub fn delta(op: &Operator, feature: &Feature, state: &State) -> Result<i8> {
    if !op.is_applicable(state) {
        return Err(Error::NotApplicable(op.name.clone()));
    }
    let next = op.apply_unchecked(state);
    Ok(feature.holds_in(state) as i8 - feature.holds_in(&next) as i8)
}

/// `[pre(o) ⊨ f] − [eff(o) ⊨ f]`, defined when `vars(f) ⊆ vars(o)`.
pub fn delta_ind(op: &Operator, feature: &Feature) -> Result<i8> {
    if !feature.vars().all(|v| op.mentions(v)) {
        return Err(Error::NotContextIndependent(feature.to_string()));
    }
    Ok(feature.entailed_by(&op.pre) as i8 - feature.entailed_by(&op.eff) as i8)
}
