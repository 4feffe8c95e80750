//! Reader and writer for the Fast Downward translator output format (version 3).
//!
//! Mutex groups are parsed and discarded. Axioms, derived variables and
//! conditional effects are rejected.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::task::{Fact, Operator, PartialAssignment, State, Task, Variable};

struct Cursor<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            lines: text.lines().map(|l| l.trim_end_matches('\r')).collect(),
            pos: 0,
        }
    }

    /// 1-based number of the line returned by the last `next`.
    fn line(&self) -> usize {
        self.pos
    }

    fn malformed<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Malformed {
            line: self.pos.max(1),
            message: message.into(),
        })
    }

    fn next(&mut self) -> Result<&'a str> {
        match self.lines.get(self.pos) {
            Some(line) => {
                self.pos += 1;
                Ok(line)
            }
            None => {
                self.pos = self.lines.len() + 1;
                self.malformed("unexpected end of input")
            }
        }
    }

    fn expect(&mut self, keyword: &str) -> Result<()> {
        let line = self.next()?;
        if line.trim() != keyword {
            return self.malformed(format!("expected `{keyword}`, found `{line}`"));
        }
        Ok(())
    }

    fn ints(&mut self, count: usize) -> Result<Vec<i64>> {
        let line = self.next()?;
        let parsed: std::result::Result<Vec<i64>, _> =
            line.split_whitespace().map(str::parse::<i64>).collect();
        match parsed {
            Ok(v) if v.len() == count => Ok(v),
            _ => self.malformed(format!("expected {count} integer(s), found `{line}`")),
        }
    }

    fn int(&mut self) -> Result<i64> {
        Ok(self.ints(1)?[0])
    }

    fn count(&mut self) -> Result<usize> {
        let v = self.int()?;
        if v < 0 {
            return self.malformed(format!("negative count {v}"));
        }
        Ok(v as usize)
    }
}

fn fact_at(cursor: &Cursor<'_>, domains: &[usize], var: i64, value: i64) -> Result<Fact> {
    if var < 0 || var as usize >= domains.len() {
        return cursor.malformed(format!("unknown variable {var}"));
    }
    let var = var as usize;
    if value < 0 || value as usize >= domains[var] {
        return Err(Error::OutOfRange {
            var,
            value: value.max(0) as usize,
            domain_size: domains[var],
        });
    }
    Ok(Fact::new(var, value as usize))
}

fn push_fact(cursor: &Cursor<'_>, facts: &mut Vec<Fact>, fact: Fact) -> Result<()> {
    if facts.iter().any(|f| f.var == fact.var) {
        return cursor.malformed(format!("variable {} bound twice", fact.var));
    }
    facts.push(fact);
    Ok(())
}

/// Parses a complete version-3 translator document.
pub fn parse_sas(text: &str) -> Result<Task> {
    let mut c = Cursor::new(text);

    c.expect("begin_version")?;
    let version = c.int()?;
    if version != 3 {
        return Err(Error::Unsupported {
            line: c.line(),
            what: format!("file format version {version}"),
        });
    }
    c.expect("end_version")?;

    c.expect("begin_metric")?;
    let use_metric = match c.int()? {
        0 => false,
        1 => true,
        other => return c.malformed(format!("metric must be 0 or 1, found {other}")),
    };
    c.expect("end_metric")?;

    let num_vars = c.count()?;
    let mut variables = Vec::with_capacity(num_vars);
    for _ in 0..num_vars {
        c.expect("begin_variable")?;
        let name = c.next()?.to_string();
        let layer = c.int()?;
        if layer != -1 {
            return Err(Error::Unsupported {
                line: c.line(),
                what: format!("derived variable `{name}` (axiom layer {layer})"),
            });
        }
        let size = c.count()?;
        if size == 0 {
            return c.malformed(format!("variable `{name}` has an empty domain"));
        }
        let mut values = Vec::with_capacity(size);
        for _ in 0..size {
            values.push(c.next()?.to_string());
        }
        c.expect("end_variable")?;
        variables.push(Variable::new(name, values));
    }
    let domains: Vec<usize> = variables.iter().map(Variable::domain_size).collect();

    let num_mutexes = c.count()?;
    for _ in 0..num_mutexes {
        c.expect("begin_mutex_group")?;
        let n = c.count()?;
        for _ in 0..n {
            let v = c.ints(2)?;
            fact_at(&c, &domains, v[0], v[1])?;
        }
        c.expect("end_mutex_group")?;
    }

    c.expect("begin_state")?;
    let mut init = Vec::with_capacity(num_vars);
    for var in 0..num_vars {
        let v = c.int()?;
        init.push(fact_at(&c, &domains, var as i64, v)?.value);
    }
    c.expect("end_state")?;

    c.expect("begin_goal")?;
    let n = c.count()?;
    let mut goal = Vec::with_capacity(n);
    for _ in 0..n {
        let v = c.ints(2)?;
        let fact = fact_at(&c, &domains, v[0], v[1])?;
        push_fact(&c, &mut goal, fact)?;
    }
    c.expect("end_goal")?;

    let num_ops = c.count()?;
    let mut operators = Vec::with_capacity(num_ops);
    for _ in 0..num_ops {
        c.expect("begin_operator")?;
        let name = c.next()?.to_string();
        let mut pre = Vec::new();
        let mut eff = Vec::new();
        let num_prevail = c.count()?;
        for _ in 0..num_prevail {
            let v = c.ints(2)?;
            let fact = fact_at(&c, &domains, v[0], v[1])?;
            push_fact(&c, &mut pre, fact)?;
        }
        let num_effects = c.count()?;
        for _ in 0..num_effects {
            let line = c.next()?;
            let nums: Vec<i64> = match line.split_whitespace().map(str::parse).collect() {
                Ok(nums) => nums,
                Err(_) => return c.malformed(format!("bad effect line `{line}`")),
            };
            if nums.is_empty() {
                return c.malformed("empty effect line");
            }
            if nums[0] != 0 {
                return Err(Error::Unsupported {
                    line: c.line(),
                    what: format!("conditional effect in operator `{name}`"),
                });
            }
            if nums.len() != 4 {
                return c.malformed(format!("bad effect line `{line}`"));
            }
            let (var, old, new) = (nums[1], nums[2], nums[3]);
            if old != -1 {
                let fact = fact_at(&c, &domains, var, old)?;
                push_fact(&c, &mut pre, fact)?;
            }
            let fact = fact_at(&c, &domains, var, new)?;
            push_fact(&c, &mut eff, fact)?;
        }
        let cost = c.int()?;
        if cost < 0 || cost > u32::MAX as i64 {
            return c.malformed(format!("operator cost {cost} is not a non-negative integer"));
        }
        c.expect("end_operator")?;
        operators.push(Operator::new(
            name,
            PartialAssignment::new(pre)?,
            PartialAssignment::new(eff)?,
            cost as u32,
        ));
    }

    let line = c.next()?;
    if line.trim() == "begin_rule" {
        return Err(Error::Unsupported {
            line: c.line(),
            what: "axiom rule".into(),
        });
    }
    match line.trim().parse::<i64>() {
        Ok(0) => {}
        Ok(n) if n > 0 => {
            return Err(Error::Unsupported {
                line: c.line(),
                what: format!("{n} axiom rule(s)"),
            })
        }
        _ => return c.malformed(format!("expected axiom count, found `{line}`")),
    }
    while let Some(rest) = c.lines.get(c.pos) {
        c.pos += 1;
        if !rest.trim().is_empty() {
            if rest.trim() == "begin_rule" {
                return Err(Error::Unsupported {
                    line: c.line(),
                    what: "axiom rule".into(),
                });
            }
            return c.malformed(format!("trailing content `{rest}`"));
        }
    }

    let mut task = Task::new(variables, operators, State(init), PartialAssignment::new(goal)?)?;
    task.use_metric = use_metric;
    Ok(task)
}

/// Serializes a task; `parse_sas` inverts this exactly.
pub fn write_sas(task: &Task) -> String {
    let mut out = String::new();
    out.push_str("begin_version\n3\nend_version\n");
    let _ = writeln!(out, "begin_metric\n{}\nend_metric", task.use_metric as u8);
    let _ = writeln!(out, "{}", task.variables.len());
    for var in &task.variables {
        let _ = writeln!(out, "begin_variable\n{}\n-1\n{}", var.name, var.domain_size());
        for value in &var.value_names {
            let _ = writeln!(out, "{value}");
        }
        out.push_str("end_variable\n");
    }
    out.push_str("0\n");
    out.push_str("begin_state\n");
    for v in task.initial_state.values() {
        let _ = writeln!(out, "{v}");
    }
    out.push_str("end_state\n");
    let _ = writeln!(out, "begin_goal\n{}", task.goal.len());
    for f in task.goal.facts() {
        let _ = writeln!(out, "{} {}", f.var, f.value);
    }
    out.push_str("end_goal\n");
    let _ = writeln!(out, "{}", task.operators.len());
    for op in &task.operators {
        let _ = writeln!(out, "begin_operator\n{}", op.name);
        let prevail: Vec<&Fact> = op
            .pre
            .facts()
            .iter()
            .filter(|f| !op.eff.contains_var(f.var))
            .collect();
        let _ = writeln!(out, "{}", prevail.len());
        for f in prevail {
            let _ = writeln!(out, "{} {}", f.var, f.value);
        }
        let _ = writeln!(out, "{}", op.eff.len());
        for f in op.eff.facts() {
            let old = op.pre.get(f.var).map_or(-1, |v| v as i64);
            let _ = writeln!(out, "0 {} {} {}", f.var, old, f.value);
        }
        let _ = writeln!(out, "{}\nend_operator", op.cost);
    }
    out.push_str("0\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::fixtures::toy1;

    pub const TOY1_SAS: &str = "begin_version
3
end_version
begin_metric
1
end_metric
2
begin_variable
X
-1
2
0
1
end_variable
begin_variable
Y
-1
2
0
1
end_variable
0
begin_state
0
0
end_state
begin_goal
2
0 1
1 1
end_goal
2
begin_operator
oX
0
1
0 0 0 1
1
end_operator
begin_operator
oY
0
1
0 1 0 1
1
end_operator
0
";

    #[test]
    fn parses_toy1() {
        let task = parse_sas(TOY1_SAS).unwrap();
        assert_eq!(task, toy1());
        assert_eq!(task.variables[0].name, "X");
        assert_eq!(task.operators[1].name, "oY");
    }

    #[test]
    fn writes_toy1_verbatim() {
        assert_eq!(write_sas(&toy1()), TOY1_SAS);
    }

    #[test]
    fn rejects_axiom_block() {
        let doc = TOY1_SAS.trim_end().strip_suffix('0').unwrap().to_string()
            + "1\nbegin_rule\n1\n0 0 1\n1 0 1\nend_rule\n";
        assert!(matches!(parse_sas(&doc), Err(Error::Unsupported { .. })));
        let doc = TOY1_SAS.trim_end().strip_suffix('0').unwrap().to_string() + "begin_rule\n";
        assert!(matches!(parse_sas(&doc), Err(Error::Unsupported { .. })));
    }

    #[test]
    fn rejects_conditional_effect() {
        let doc = TOY1_SAS.replace("0 0 0 1", "1 1 0 0 0 1");
        assert!(matches!(parse_sas(&doc), Err(Error::Unsupported { .. })));
    }

    #[test]
    fn rejects_out_of_range_value() {
        let doc = TOY1_SAS.replace("0 0 0 1", "0 0 0 2");
        assert!(matches!(
            parse_sas(&doc),
            Err(Error::OutOfRange {
                var: 0,
                value: 2,
                domain_size: 2
            })
        ));
    }

    #[test]
    fn reports_line_of_malformed_section() {
        let doc = TOY1_SAS.replace("end_state", "end_stat");
        match parse_sas(&doc) {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 26),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ignores_mutex_groups() {
        let doc = TOY1_SAS.replacen(
            "end_variable\n0\nbegin_state",
            "end_variable\n1\nbegin_mutex_group\n2\n0 0\n1 0\nend_mutex_group\nbegin_state",
            1,
        );
        assert_eq!(parse_sas(&doc).unwrap(), toy1());
    }

    #[test]
    fn prevail_conditions_become_preconditions() {
        let doc = TOY1_SAS.replacen("oX\n0\n1\n0 0 0 1", "oX\n1\n1 0\n1\n0 0 0 1", 1);
        let task = parse_sas(&doc).unwrap();
        assert_eq!(task.operators[0].pre, PartialAssignment::from_pairs(&[(0, 0), (1, 0)]));
        assert_eq!(task.operators[0].eff, PartialAssignment::from_pairs(&[(0, 1)]));
        assert_eq!(parse_sas(&write_sas(&task)).unwrap(), task);
    }
}
