//! Adapter that hands models to an external solver process.
//!
//! The command receives the model as a CPLEX LP file and must write a solution
//! file with one `name value` pair per line, optionally preceded by a line
//! `status optimal|infeasible|unbounded`. Unknowns missing from the file are 0.

use std::path::PathBuf;
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};

use super::{export_lp, LpError, LpModel, LpSolution, LpSolver, LpStatus};

/// Environment variable naming the external solver command.
pub const SOLVER_CMD_ENV: &str = "POTPLAN_LP_SOLVER_CMD";

static COUNTER: AtomicUsize = AtomicUsize::new(0);

#[derive(Clone, Debug)]
pub struct ExternalSolver {
    /// Whitespace-separated command; `{lp}` and `{sol}` are replaced by the
    /// file paths, which are appended when neither placeholder occurs.
    pub command: String,
}

impl ExternalSolver {
    pub fn new(command: impl Into<String>) -> Self {
        ExternalSolver {
            command: command.into(),
        }
    }
}

fn scratch_path(ext: &str) -> PathBuf {
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    std::env::temp_dir().join(format!("potplan-{}-{n}.{ext}", std::process::id()))
}

impl LpSolver for ExternalSolver {
    fn solve(&self, model: &LpModel) -> Result<LpSolution, LpError> {
        model.validate()?;
        let fail = |m: String| LpError::SolverFailure(m);
        let lp_path = scratch_path("lp");
        let sol_path = scratch_path("sol");
        std::fs::write(&lp_path, export_lp(model)).map_err(|e| fail(e.to_string()))?;

        let mut parts: Vec<String> = self.command.split_whitespace().map(str::to_string).collect();
        if parts.is_empty() {
            return Err(fail("empty solver command".into()));
        }
        let lp = lp_path.display().to_string();
        let sol = sol_path.display().to_string();
        let templated = parts.iter().any(|p| p.contains("{lp}") || p.contains("{sol}"));
        if templated {
            for p in &mut parts {
                *p = p.replace("{lp}", &lp).replace("{sol}", &sol);
            }
        } else {
            parts.push(lp.clone());
            parts.push(sol.clone());
        }
        let output = Command::new(&parts[0]).args(&parts[1..]).output();
        let _ = std::fs::remove_file(&lp_path);
        let output = output.map_err(|e| fail(format!("cannot run {}: {e}", parts[0])))?;
        if !output.status.success() {
            let _ = std::fs::remove_file(&sol_path);
            return Err(fail(format!(
                "{} exited with {}: {}",
                parts[0],
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        let text = std::fs::read_to_string(&sol_path);
        let _ = std::fs::remove_file(&sol_path);
        let text = text.map_err(|e| fail(format!("cannot read solution file: {e}")))?;
        parse_solution(model, &text)
    }
}

fn parse_solution(model: &LpModel, text: &str) -> Result<LpSolution, LpError> {
    let mut values = vec![0.0; model.num_unknowns()];
    let mut status = LpStatus::Optimal;
    for line in text.lines() {
        let mut it = line.split_whitespace();
        let (Some(name), Some(value)) = (it.next(), it.next()) else {
            continue;
        };
        if name.eq_ignore_ascii_case("status") {
            status = match value.to_ascii_lowercase().as_str() {
                "optimal" => LpStatus::Optimal,
                "infeasible" => LpStatus::Infeasible,
                "unbounded" => LpStatus::Unbounded,
                other => return Err(LpError::SolverFailure(format!("unknown status {other}"))),
            };
            continue;
        }
        let id = model
            .unknown_index(name)
            .ok_or_else(|| LpError::SolverFailure(format!("unknown name {name} in solution")))?;
        values[id] = value
            .parse()
            .map_err(|_| LpError::SolverFailure(format!("bad value {value:?} for {name}")))?;
    }
    Ok(match status {
        LpStatus::Optimal => LpSolution {
            status,
            objective_value: Some(model.objective.evaluate_dense(&values)),
            values,
        },
        LpStatus::Infeasible => LpSolution::infeasible(),
        LpStatus::Unbounded => LpSolution::unbounded(),
    })
}
