//! Dense two-phase primal simplex with bounded variables.
//!
//! Every row gets a logical column `y_r = row activity` bounded by the row's
//! relation. Structural columns start nonbasic at the feasible value closest to
//! zero; rows whose activity violates their bounds get an artificial column.

use super::{LpError, LpModel, LpSolution, LpSolver, LpStatus, Relation, Sense};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;
const PHASE1_TOL: f64 = 1e-7;
const DEGENERATE_LIMIT: usize = 50;
const REFRESH_EVERY: usize = 64;

#[derive(Clone, Debug, Default)]
pub struct SimplexSolver {
    /// Overrides the default iteration budget.
    pub max_iterations: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Basic,
    Lower,
    Upper,
    /// Nonbasic strictly between its bounds (free columns start here).
    Interior,
}

struct Tableau {
    m: usize,
    ncols: usize,
    /// Row-major `m × ncols` matrix of `B⁻¹·[A | −I | ±E]`.
    t: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    x: Vec<f64>,
    status: Vec<Status>,
    basis: Vec<usize>,
    /// Reduced costs of the current phase (maximization).
    d: Vec<f64>,
    iterations: usize,
    limit: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn row(&self, r: usize) -> &[f64] {
        &self.t[r * self.ncols..(r + 1) * self.ncols]
    }

    fn set_costs(&mut self, c: &[f64]) {
        let mut d = c.to_vec();
        for r in 0..self.m {
            let cb = c[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * self.ncols..(r + 1) * self.ncols];
                for (dj, &tj) in d.iter_mut().zip(row) {
                    *dj -= cb * tj;
                }
            }
        }
        for &b in &self.basis {
            d[b] = 0.0;
        }
        self.d = d;
    }

    /// Recomputes basic values from the nonbasic ones.
    fn refresh_basic_values(&mut self) {
        for r in 0..self.m {
            let row = self.row(r);
            let mut v = 0.0;
            for j in 0..self.ncols {
                if self.status[j] != Status::Basic && row[j] != 0.0 {
                    v -= row[j] * self.x[j];
                }
            }
            let b = self.basis[r];
            self.x[b] = v;
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let n = self.ncols;
        let p = self.t[r * n + j];
        let mut nz = Vec::new();
        for k in 0..n {
            let v = self.t[r * n + k] / p;
            let v = if v.abs() < DROP_TOL { 0.0 } else { v };
            self.t[r * n + k] = v;
            if v != 0.0 {
                nz.push((k, v));
            }
        }
        self.t[r * n + j] = 1.0;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * n + j];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * n..(i + 1) * n];
            for &(k, v) in &nz {
                let nv = row[k] - f * v;
                row[k] = if nv.abs() < DROP_TOL { 0.0 } else { nv };
            }
            row[j] = 0.0;
        }
        let f = self.d[j];
        if f != 0.0 {
            for &(k, v) in &nz {
                self.d[k] -= f * v;
            }
        }
        self.d[j] = 0.0;
        let leaving = self.basis[r];
        self.basis[r] = j;
        self.status[j] = Status::Basic;
        self.status[leaving] = if self.x[leaving] <= self.lo[leaving] {
            Status::Lower
        } else if self.x[leaving] >= self.up[leaving] {
            Status::Upper
        } else {
            Status::Interior
        };
    }

    fn entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.ncols {
            let st = self.status[j];
            if st == Status::Basic {
                continue;
            }
            let dj = self.d[j];
            let dir = if dj > COST_TOL && st != Status::Upper && self.x[j] < self.up[j] {
                1.0
            } else if dj < -COST_TOL && st != Status::Lower && self.x[j] > self.lo[j] {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn run(&mut self) -> Result<Outcome, LpError> {
        let mut degenerate = 0usize;
        let mut since_refresh = 0usize;
        loop {
            self.iterations += 1;
            if self.iterations > self.limit {
                return Err(LpError::SolverFailure(format!(
                    "iteration limit {} reached",
                    self.limit
                )));
            }
            let bland = degenerate > DEGENERATE_LIMIT;
            let Some((j, dir)) = self.entering(bland) else {
                return Ok(Outcome::Optimal);
            };
            let mut theta = if dir > 0.0 {
                self.up[j] - self.x[j]
            } else {
                self.x[j] - self.lo[j]
            };
            let mut leave: Option<(usize, f64)> = None;
            let mut leave_pivot = 0.0;
            for r in 0..self.m {
                let tr = self.t[r * self.ncols + j];
                if tr.abs() < PIVOT_TOL {
                    continue;
                }
                let rate = -dir * tr;
                let b = self.basis[r];
                let (limit, bound) = if rate < 0.0 {
                    if self.lo[b] == f64::NEG_INFINITY {
                        continue;
                    }
                    ((self.x[b] - self.lo[b]) / -rate, self.lo[b])
                } else {
                    if self.up[b] == f64::INFINITY {
                        continue;
                    }
                    ((self.up[b] - self.x[b]) / rate, self.up[b])
                };
                let limit = limit.max(0.0);
                if limit < theta - 1e-12 {
                    theta = limit;
                    leave = Some((r, bound));
                    leave_pivot = tr.abs();
                } else if limit <= theta + 1e-12 {
                    if let Some((cur, _)) = leave {
                        let prefer = if bland {
                            b < self.basis[cur]
                        } else {
                            tr.abs() > leave_pivot
                        };
                        if prefer {
                            theta = theta.min(limit);
                            leave = Some((r, bound));
                            leave_pivot = tr.abs();
                        }
                    }
                }
            }
            if theta.is_infinite() {
                return Ok(Outcome::Unbounded);
            }
            if theta <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            if theta != 0.0 {
                self.x[j] += dir * theta;
                for r in 0..self.m {
                    let tr = self.t[r * self.ncols + j];
                    if tr != 0.0 {
                        let b = self.basis[r];
                        self.x[b] -= dir * tr * theta;
                    }
                }
            }
            match leave {
                None => {
                    if dir > 0.0 {
                        self.x[j] = self.up[j];
                        self.status[j] = Status::Upper;
                    } else {
                        self.x[j] = self.lo[j];
                        self.status[j] = Status::Lower;
                    }
                }
                Some((r, bound)) => {
                    let b = self.basis[r];
                    self.x[b] = bound;
                    self.pivot(r, j);
                    since_refresh += 1;
                    if since_refresh >= REFRESH_EVERY {
                        since_refresh = 0;
                        self.refresh_basic_values();
                    }
                }
            }
        }
    }
}

impl LpSolver for SimplexSolver {
    fn solve(&self, model: &LpModel) -> Result<LpSolution, LpError> {
        model.validate()?;
        let n = model.num_unknowns();
        let m = model.num_rows();

        let mut lo: Vec<f64> = model.unknowns.iter().map(|u| u.lower).collect();
        let mut up: Vec<f64> = model.unknowns.iter().map(|u| u.upper).collect();
        let mut x: Vec<f64> = lo.iter().zip(&up).map(|(&l, &u)| 0f64.clamp(l, u)).collect();
        let mut status: Vec<Status> = (0..n)
            .map(|j| {
                if x[j] == lo[j] {
                    Status::Lower
                } else if x[j] == up[j] {
                    Status::Upper
                } else {
                    Status::Interior
                }
            })
            .collect();

        // logical columns n..n+m, artificial columns appended afterwards
        let mut artificial_rows = Vec::new();
        let mut activities = Vec::with_capacity(m);
        for (r, row) in model.rows.iter().enumerate() {
            let (ylo, yup) = match row.relation {
                Relation::Le => (f64::NEG_INFINITY, row.rhs),
                Relation::Ge => (row.rhs, f64::INFINITY),
                Relation::Eq => (row.rhs, row.rhs),
            };
            lo.push(ylo);
            up.push(yup);
            let act = row.expr.evaluate_dense(&x);
            activities.push(act);
            if act < ylo - 1e-12 || act > yup + 1e-12 {
                artificial_rows.push(r);
            }
        }
        let ncols = n + m + artificial_rows.len();
        let mut t = vec![0.0; m * ncols];
        let mut basis = vec![0usize; m];
        x.resize(ncols, 0.0);
        status.resize(ncols, Status::Basic);
        let mut art_of_row = vec![None; m];
        for (k, &r) in artificial_rows.iter().enumerate() {
            art_of_row[r] = Some(n + m + k);
        }
        for (r, row) in model.rows.iter().enumerate() {
            let y = n + r;
            let base = r * ncols;
            match art_of_row[r] {
                None => {
                    for (j, a) in row.expr.terms() {
                        t[base + j] = -a;
                    }
                    t[base + y] = 1.0;
                    basis[r] = y;
                    x[y] = activities[r];
                    status[y] = Status::Basic;
                }
                Some(a_col) => {
                    let yb = activities[r].clamp(lo[y], up[y]);
                    let s = if yb > activities[r] { 1.0 } else { -1.0 };
                    for (j, a) in row.expr.terms() {
                        t[base + j] = a / s;
                    }
                    t[base + y] = -1.0 / s;
                    t[base + a_col] = 1.0;
                    x[y] = yb;
                    status[y] = if yb == lo[y] { Status::Lower } else { Status::Upper };
                    basis[r] = a_col;
                    x[a_col] = (yb - activities[r]).abs();
                    status[a_col] = Status::Basic;
                }
            }
        }
        for _ in 0..artificial_rows.len() {
            lo.push(0.0);
            up.push(f64::INFINITY);
        }

        let limit = self.max_iterations.unwrap_or(100 * (m + ncols) + 10_000);
        let mut tab = Tableau {
            m,
            ncols,
            t,
            lo,
            up,
            x,
            status,
            basis,
            d: Vec::new(),
            iterations: 0,
            limit,
        };

        if !artificial_rows.is_empty() {
            let mut c = vec![0.0; ncols];
            for a_col in n + m..ncols {
                c[a_col] = -1.0;
            }
            tab.set_costs(&c);
            tab.run()?;
            tab.refresh_basic_values();
            let infeasibility: f64 = (n + m..ncols).map(|a| tab.x[a].max(0.0)).sum();
            if infeasibility > PHASE1_TOL {
                return Ok(LpSolution::infeasible());
            }
            for a_col in n + m..ncols {
                tab.up[a_col] = 0.0;
                if tab.status[a_col] != Status::Basic {
                    tab.x[a_col] = 0.0;
                    tab.status[a_col] = Status::Lower;
                }
            }
            // drive zero-valued artificials out of the basis where possible
            for r in 0..m {
                let b = tab.basis[r];
                if b < n + m {
                    continue;
                }
                let row = tab.row(r);
                let mut best = None;
                let mut best_abs = 1e-7;
                for (k, &v) in row.iter().enumerate().take(n + m) {
                    if tab.status[k] != Status::Basic && v.abs() > best_abs {
                        best_abs = v.abs();
                        best = Some(k);
                    }
                }
                if let Some(k) = best {
                    tab.x[b] = 0.0;
                    tab.pivot(r, k);
                    tab.status[b] = Status::Lower;
                }
            }
            tab.refresh_basic_values();
        }

        let sign = match model.sense {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        };
        let mut c = vec![0.0; ncols];
        for (j, coef) in model.objective.terms() {
            c[j] = sign * coef;
        }
        tab.set_costs(&c);
        match tab.run()? {
            Outcome::Unbounded => return Ok(LpSolution::unbounded()),
            Outcome::Optimal => {}
        }
        tab.refresh_basic_values();
        let values: Vec<f64> = tab.x[..n].to_vec();
        let violation = model.max_violation(&values);
        if violation > 1e-6 * (1.0 + max_abs(&values)) {
            return Err(LpError::SolverFailure(format!(
                "numerical trouble: final point violates the model by {violation:e}"
            )));
        }
        let objective_value = model.objective.evaluate_dense(&values);
        Ok(LpSolution {
            status: LpStatus::Optimal,
            values,
            objective_value: Some(objective_value),
        })
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve, LinearExpression};

    fn x_le_3() -> LpModel {
        let mut m = LpModel::new();
        let x = m.add_free("x");
        m.add_row(LinearExpression::var(x), Relation::Le, 3.0);
        m.set_objective(Sense::Maximize, LinearExpression::var(x));
        m
    }

    #[test]
    fn maximize_bounded_by_row() {
        let sol = solve(&x_le_3()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value.unwrap() - 3.0).abs() < 1e-9);
        assert!((sol.values[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn unbounded_without_rows() {
        let mut m = LpModel::new();
        let x = m.add_free("x");
        m.set_objective(Sense::Maximize, LinearExpression::var(x));
        assert_eq!(solve(&m).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut m = LpModel::new();
        let x = m.add_free("x");
        m.add_row(LinearExpression::var(x), Relation::Ge, 1.0);
        m.add_row(LinearExpression::var(x), Relation::Le, 0.0);
        assert_eq!(solve(&m).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn empty_model_is_optimal_at_zero() {
        let sol = solve(&LpModel::new()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.objective_value, Some(0.0));
    }

    #[test]
    fn textbook_minimization() {
        // min 2x + 3y  s.t.  x + y >= 4, x + 3y >= 6, x, y >= 0  → x = 3, y = 1, 9
        let mut m = LpModel::new();
        let x = m.add_unknown("x", 0.0, f64::INFINITY);
        let y = m.add_unknown("y", 0.0, f64::INFINITY);
        m.add_row(LinearExpression::from_terms(0.0, [(x, 1.0), (y, 1.0)]), Relation::Ge, 4.0);
        m.add_row(LinearExpression::from_terms(0.0, [(x, 1.0), (y, 3.0)]), Relation::Ge, 6.0);
        m.set_objective(Sense::Minimize, LinearExpression::from_terms(0.0, [(x, 2.0), (y, 3.0)]));
        let sol = solve(&m).unwrap();
        assert!((sol.objective_value.unwrap() - 9.0).abs() < 1e-9);
        assert!((sol.values[x] - 3.0).abs() < 1e-9);
        assert!((sol.values[y] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equality_rows_and_bounds() {
        // max x + y  s.t.  x − y = 1, x ≤ 5 (bound), y ∈ [−2, 10]
        let mut m = LpModel::new();
        let x = m.add_unknown("x", f64::NEG_INFINITY, 5.0);
        let y = m.add_unknown("y", -2.0, 10.0);
        m.add_row(LinearExpression::from_terms(0.0, [(x, 1.0), (y, -1.0)]), Relation::Eq, 1.0);
        m.set_objective(Sense::Maximize, LinearExpression::from_terms(0.0, [(x, 1.0), (y, 1.0)]));
        let sol = solve(&m).unwrap();
        assert!((sol.objective_value.unwrap() - 9.0).abs() < 1e-9);
    }

    #[test]
    fn objective_constant_is_reported() {
        let mut m = x_le_3();
        m.objective.constant = 2.0;
        assert!((solve(&m).unwrap().objective_value.unwrap() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn iteration_limit_is_a_failure() {
        let mut m = LpModel::new();
        let x = m.add_unknown("x", 0.0, f64::INFINITY);
        let y = m.add_unknown("y", 0.0, f64::INFINITY);
        m.add_row(LinearExpression::from_terms(0.0, [(x, 1.0), (y, 2.0)]), Relation::Le, 4.0);
        m.add_row(LinearExpression::from_terms(0.0, [(x, 3.0), (y, 1.0)]), Relation::Le, 6.0);
        m.set_objective(Sense::Maximize, LinearExpression::from_terms(0.0, [(x, 1.0), (y, 1.0)]));
        let solver = SimplexSolver {
            max_iterations: Some(1),
        };
        assert!(matches!(solver.solve(&m), Err(LpError::SolverFailure(_))));
    }
}
