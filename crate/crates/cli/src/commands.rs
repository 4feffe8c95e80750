use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use potplan_core::bucket::build_general_lp;
use potplan_core::cost_partitioning::{all_projections, build_ocp_lp, build_tcp_lp};
use potplan_core::feature::{evaluate_potential, generate_features, parse_feature, parse_feature_list, FeatureSet, PotentialFunction, WeightFunction};
use potplan_core::generator::{goal_reachable, try_random_task, try_random_tnf_task, GeneratorConfig};
use potplan_core::hardness::{phi_of_state, reduce_3col, Graph};
use potplan_core::lp::{export_lp, solver_from_env, LpSolver, LpStatus, Sense};
use potplan_core::potential::{
    build_exhaustive_lp, mean_potential_expression, objective_states, shift_to_goal, Direct2dLp, PotentialLp,
};
use potplan_core::sas::{parse_sas, write_sas};
use potplan_core::search::{astar, validate, Counterexample, ValidationReport};
use potplan_core::task::{State, Task};
use potplan_core::tnf::{is_tnf, to_tnf};
use potplan_core::transition::{build_transition_system, goal_distances, DEFAULT_STATE_CAP};

use crate::{Command, FeatureArgs, Failure, Format, Heuristic, LpArgs, Method};

type Outcome = Result<(), Failure>;

pub fn run(command: Command) -> Outcome {
    match command {
        Command::ValidateTask { task } => validate_task(&task),
        Command::Tnf { task, out } => tnf(&task, out.as_deref()),
        Command::Lp { lp, out } => lp_file(&lp, out.as_deref()),
        Command::Solve { lp, weights_out, shifted } => solve(&lp, weights_out.as_deref(), shifted),
        Command::Search { task, heuristic, timing } => search(&task, &heuristic, timing),
        Command::Validate { task, weights, cap } => validate_weights(&task, &weights, cap),
        Command::Compare { task, state, format, cap } => compare(&task, &state, format, cap),
        Command::Width { task, features, order, format } => width(&task, &features, order.as_deref(), format),
        Command::Reduce3col { graph, check, out, weights_out } => {
            reduce(&graph, check, out.as_deref(), weights_out.as_deref())
        }
        Command::Gen { vars, dom, ops, seed, max_op_vars, min_cost, max_cost, general, out } => {
            if min_cost > max_cost {
                return Err(Failure::Usage("--min-cost exceeds --max-cost".into()));
            }
            let config = GeneratorConfig {
                vars: vars as usize,
                max_domain: dom as usize,
                ops: ops as usize,
                min_cost,
                max_cost,
                max_op_vars: max_op_vars as usize,
                solvable: true,
            };
            let task = if general { try_random_task(&config, seed)? } else { try_random_tnf_task(&config, seed)? };
            emit(out.as_deref(), &write_sas(&task))
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn load_task(path: &Path) -> Result<Task, Failure> {
    parse_sas(&read(path)?).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

/// The task itself when already in TNF, else its TNF conversion.
fn tnf_form(task: Task) -> Task {
    if is_tnf(&task) {
        task
    } else {
        eprintln!("note: task converted to transition normal form");
        to_tnf(&task).0
    }
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display()))),
        None => {
            say(text.strip_suffix('\n').unwrap_or(text));
            Ok(())
        }
    }
}

/// Writes a line to stdout. A closed pipe (`| head`) is not an error.
fn say(line: &str) {
    let _ = writeln!(io::stdout().lock(), "{line}");
}

fn print_json(value: &Value) {
    say(&serde_json::to_string_pretty(value).expect("JSON values serialize"));
}

/// JSON has no infinity; dead ends are reported as the string `"inf"`.
fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn feature_set(task: &Task, args: &FeatureArgs) -> Result<FeatureSet, Failure> {
    match &args.features {
        Some(path) => {
            let list = parse_feature_list(task, &read(path)?)?;
            Ok(generate_features(task, args.dim as usize, Some(&list))?)
        }
        None => Ok(generate_features(task, args.dim as usize, None)?),
    }
}

fn parse_orders(task: &Task, path: &Path) -> Result<Vec<Vec<usize>>, Failure> {
    read(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|line| {
            line.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    task.variable_index(t)
                        .or_else(|| t.parse::<usize>().ok().filter(|&v| v < task.num_vars()))
                        .ok_or_else(|| Failure::Usage(format!("unknown variable `{t}` in order file")))
                })
                .collect()
        })
        .collect()
}

fn method_for(args: &LpArgs, fs: &FeatureSet) -> Result<Method, Failure> {
    let dim = fs.dimension().max(args.features.dim as usize * args.features.features.is_none() as usize);
    let method = args.method.unwrap_or(if dim <= 2 { Method::Direct2d } else { Method::Bucket });
    if method == Method::Direct2d && dim > 2 {
        return Err(Failure::Usage(format!("direct2d supports dimension at most 2, got {dim}")));
    }
    if args.order.is_some() && method != Method::Bucket {
        return Err(Failure::Usage("--order only applies to the bucket method".into()));
    }
    Ok(method)
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Direct2d => "direct2d",
        Method::Bucket => "bucket",
        Method::Exhaustive => "exhaustive",
    }
}

struct Prepared {
    task: Task,
    fs: FeatureSet,
    method: Method,
    lp: PotentialLp,
}

fn prepare(args: &LpArgs) -> Result<Prepared, Failure> {
    let task = load_task(&args.task)?;
    if args.features.features.is_none() && args.features.dim > 2 && args.method == Some(Method::Direct2d) {
        return Err(Failure::Usage(format!(
            "direct2d supports dimension at most 2, got {}",
            args.features.dim
        )));
    }
    let task = tnf_form(task);
    let fs = feature_set(&task, &args.features)?;
    let method = method_for(args, &fs)?;
    let lp = match method {
        Method::Direct2d => Direct2dLp::build(&task, &fs)?.into_potential_lp(),
        Method::Exhaustive => build_exhaustive_lp(&task, &fs, args.cap)?,
        Method::Bucket => {
            let orders = args.order.as_deref().map(|p| parse_orders(&task, p)).transpose()?;
            build_general_lp(&task, &fs, orders.as_deref())?.into_potential_lp()
        }
    };
    Ok(Prepared { task, fs, method, lp })
}

fn weights_json(task: &Task, fs: &FeatureSet, w: &WeightFunction) -> Value {
    let mut map = Map::new();
    for (i, f) in fs.iter() {
        map.insert(f.display(task), json!(w.0[i]));
    }
    Value::Object(map)
}

fn read_weights(task: &Task, path: &Path) -> Result<(FeatureSet, WeightFunction), Failure> {
    let text = read(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
    let map = value
        .as_object()
        .ok_or_else(|| Failure::Domain(format!("{}: expected an object of feature weights", path.display())))?;
    let mut features = Vec::with_capacity(map.len());
    let mut weights = Vec::with_capacity(map.len());
    for (key, w) in map {
        features.push(parse_feature(task, key)?);
        weights.push(
            w.as_f64()
                .ok_or_else(|| Failure::Domain(format!("weight of `{key}` is not a number")))?,
        );
    }
    Ok((FeatureSet::new(features)?, WeightFunction(weights)))
}

fn state_json(task: &Task, s: &State) -> Value {
    let mut map = Map::new();
    for (v, var) in task.variables.iter().enumerate() {
        map.insert(var.name.clone(), json!(var.value_names[s[v]]));
    }
    Value::Object(map)
}

fn parse_state(task: &Task, text: &str) -> Result<State, Failure> {
    if text == "init" {
        return Ok(task.initial_state.clone());
    }
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != task.num_vars() {
        return Err(Failure::Usage(format!(
            "state needs {} comma-separated values, got {}",
            task.num_vars(),
            parts.len()
        )));
    }
    parts
        .iter()
        .enumerate()
        .map(|(v, p)| {
            let names = &task.variables[v].value_names;
            names
                .iter()
                .position(|n| n == p)
                .or_else(|| p.parse::<usize>().ok().filter(|&x| x < names.len()))
                .ok_or_else(|| Failure::Usage(format!("unknown value `{p}` of {}", task.variables[v].name)))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(State)
}

fn validate_task(path: &Path) -> Outcome {
    let task = load_task(path)?;
    let states = task.num_states();
    let solvable = if states <= DEFAULT_STATE_CAP { json!(goal_reachable(&task)) } else { Value::Null };
    print_json(&json!({
        "variables": task.num_vars(),
        "operators": task.operators.len(),
        "goal_facts": task.goal.len(),
        "states": states,
        "tnf": is_tnf(&task),
        "solvable": solvable,
    }));
    Ok(())
}

fn tnf(path: &Path, out: Option<&Path>) -> Outcome {
    let task = load_task(path)?;
    if is_tnf(&task) {
        eprintln!("note: task is already in transition normal form");
    }
    emit(out, &write_sas(&tnf_form(task)))
}

fn lp_file(args: &LpArgs, out: Option<&Path>) -> Outcome {
    let Prepared { task, fs, mut lp, .. } = prepare(args)?;
    let states = objective_states(&task, args.objective, args.seed);
    let objective = mean_potential_expression(&fs, &lp.weight_vars, &states);
    lp.model.set_objective(Sense::Maximize, objective);
    emit(out, &export_lp(&lp.model))
}

fn solve(args: &LpArgs, weights_out: Option<&Path>, shifted: bool) -> Outcome {
    let Prepared { task, fs, method, mut lp } = prepare(args)?;
    let states = objective_states(&task, args.objective, args.seed);
    let (rows, columns) = (lp.model.num_rows(), lp.model.num_unknowns());
    let solver = solver_from_env();
    let sol = lp.solve_for_states(&fs, &states, solver.as_ref())?;
    if sol.bound_active {
        eprintln!("note: some weight sits at its bound; the optimum may be artificial");
    }
    let weights = weights_json(&task, &fs, &sol.weights);
    if let Some(path) = weights_out {
        emit(Some(path), &format!("{}\n", serde_json::to_string_pretty(&weights).unwrap()))?;
    }
    let mut out = json!({
        "objective": sol.value,
        "method": method_name(method),
        "dimension": fs.dimension(),
        "features": fs.len(),
        "rows": rows,
        "columns": columns,
        "bound_active": sol.bound_active,
        "weights": weights,
    });
    if shifted {
        let w = shift_to_goal(&task, &fs, &sol.weights).ok_or_else(|| {
            Failure::Usage("shifting needs every atom of some variable among the features".into())
        })?;
        out["goal_value"] = json!(evaluate_potential(&fs, &sol.weights, &task.goal_state().expect("TNF goal")));
        out["shifted_weights"] = weights_json(&task, &fs, &w);
    }
    print_json(&out);
    Ok(())
}

fn optimized_potential(task: &Task, dim: usize, states: &[State], solver: &dyn LpSolver) -> Result<(FeatureSet, WeightFunction, f64), Failure> {
    let fs = generate_features(task, dim, None)?;
    let sol = Direct2dLp::build(task, &fs)?
        .into_potential_lp()
        .solve_for_states(&fs, states, solver)?;
    Ok((fs, sol.weights, sol.value))
}

fn search(path: &Path, heuristic: &Heuristic, timing: bool) -> Outcome {
    let task = load_task(path)?;
    let (task, pot, label) = match heuristic {
        Heuristic::Blind => (task, None, "blind".to_string()),
        Heuristic::Potential(dim) => {
            let task = tnf_form(task);
            let solver = solver_from_env();
            let (fs, w, _) = optimized_potential(&task, *dim, std::slice::from_ref(&task.initial_state), solver.as_ref())?;
            let pot = PotentialFunction::new(&task, &fs, &w);
            (task, Some(pot), format!("pot{dim}"))
        }
        Heuristic::Weights(file) => {
            let task = tnf_form(task);
            let (fs, w) = read_weights(&task, file)?;
            let pot = PotentialFunction::new(&task, &fs, &w);
            (task, Some(pot), format!("weights:{}", file.display()))
        }
    };
    let h = |s: &State| pot.as_ref().map_or(0.0, |p| p.evaluate(s));
    let result = astar(&task, &h)?;
    let plan: Vec<&str> = result
        .plan
        .iter()
        .flatten()
        .map(|&op| task.operators[op].name.as_str())
        .collect();
    let mut out = json!({
        "heuristic": label,
        "plan": plan,
        "cost": result.cost,
        "expansions": result.expansions,
        "expansions_before_last_f_layer": result.expansions_before_last_f_layer,
        "evaluated": result.evaluated,
    });
    if timing {
        out["wall_time"] = json!(result.wall_time);
    }
    print_json(&out);
    Ok(())
}

fn report_json(task: &Task, report: &ValidationReport) -> Value {
    let counterexample = match &report.counterexample {
        None => Value::Null,
        Some(Counterexample::Transition { state, op }) => json!({
            "kind": "inconsistent transition",
            "state": state_json(task, state),
            "operator": task.operators[*op].name,
        }),
        Some(Counterexample::GoalState(s)) => json!({
            "kind": "positive goal value",
            "state": state_json(task, s),
        }),
        Some(Counterexample::Overestimate(s)) => json!({
            "kind": "overestimate",
            "state": state_json(task, s),
        }),
    };
    json!({
        "goal_aware": report.goal_aware,
        "consistent": report.consistent,
        "admissible": report.admissible,
        "counterexample": counterexample,
    })
}

fn validate_weights(path: &Path, weights: &Path, cap: u128) -> Outcome {
    let task = tnf_form(load_task(path)?);
    let (fs, w) = read_weights(&task, weights)?;
    let pot = PotentialFunction::new(&task, &fs, &w);
    let report = validate(&task, &|s: &State| pot.evaluate(s), cap)?;
    print_json(&report_json(&task, &report));
    Ok(())
}

/// Optimum of a cost-partitioning LP; an unbounded LP means a dead end.
fn cp_value(model: &potplan_core::lp::LpModel, solver: &dyn LpSolver) -> Result<f64, Failure> {
    let sol = solver.solve(model).map_err(potplan_core::Error::from)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective_value.unwrap_or(0.0)),
        LpStatus::Unbounded => Ok(f64::INFINITY),
        status => Err(Failure::Domain(format!("cost-partitioning LP is {status:?}"))),
    }
}

fn compare(path: &Path, state: &str, format: Format, cap: u128) -> Outcome {
    let task = tnf_form(load_task(path)?);
    let s = parse_state(&task, state)?;
    let solver = solver_from_env();
    let states = [s.clone()];
    let (_, _, pot1) = optimized_potential(&task, 1, &states, solver.as_ref())?;
    let (_, _, pot2) = optimized_potential(&task, 2, &states, solver.as_ref())?;
    let (mut ocp, mut tcp, mut h_star) = (None, None, None);
    match build_transition_system(&task, cap) {
        Ok(ts) => {
            let abstractions = all_projections(&ts, 2)?;
            ocp = Some(cp_value(&build_ocp_lp(&ts, &abstractions, &s).model, solver.as_ref())?);
            tcp = Some(cp_value(&build_tcp_lp(&ts, &abstractions, &s).model, solver.as_ref())?);
            h_star = Some(goal_distances(&ts)[ts.index_of(&s)]);
        }
        Err(e) => eprintln!("note: {e}; cost partitioning and h* skipped"),
    }
    let columns = [
        ("h_pot1", Some(pot1)),
        ("h_pot2", Some(pot2)),
        ("h_ocp2", ocp),
        ("h_tcp2", tcp),
        ("h_star", h_star),
    ];
    match format {
        Format::Json => {
            let mut map = Map::new();
            map.insert("state".into(), state_json(&task, &s));
            for (name, v) in columns {
                map.insert(name.into(), v.map_or(Value::Null, number));
            }
            print_json(&Value::Object(map));
        }
        Format::Csv => {
            let header: Vec<&str> = columns.iter().map(|(n, _)| *n).collect();
            let row: Vec<String> = columns.iter().map(|(_, v)| v.map_or(String::new(), |x| x.to_string())).collect();
            say(&header.join(","));
            say(&row.join(","));
        }
    }
    Ok(())
}

fn width(path: &Path, features: &FeatureArgs, order: Option<&Path>, format: Format) -> Outcome {
    let task = tnf_form(load_task(path)?);
    let fs = feature_set(&task, features)?;
    let orders = order.map(|p| parse_orders(&task, p)).transpose()?;
    let lp = build_general_lp(&task, &fs, orders.as_deref())?;
    let name = |v: usize| task.variables[v].name.clone();
    match format {
        Format::Json => {
            let ops: Vec<Value> = lp
                .operators
                .iter()
                .zip(&task.operators)
                .map(|(enc, o)| {
                    json!({
                        "operator": o.name,
                        "width": enc.width,
                        "functions": enc.functions,
                        "aux_unknowns": enc.aux_unknowns,
                        "aux_rows": enc.aux_rows,
                        "order": enc.order.iter().map(|&v| name(v)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            print_json(&json!({ "max_width": lp.max_width(), "operators": ops }));
        }
        Format::Csv => {
            say("operator,width,functions,aux_unknowns,aux_rows");
            for (enc, o) in lp.operators.iter().zip(&task.operators) {
                say(&format!("{},{},{},{},{}", csv_field(&o.name), enc.width, enc.functions, enc.aux_unknowns, enc.aux_rows));
            }
        }
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn reduce(graph: &Path, check: bool, out: Option<&Path>, weights_out: Option<&Path>) -> Outcome {
    let g = Graph::parse_dimacs(&read(graph)?).map_err(|e| Failure::Domain(format!("{}: {e}", graph.display())))?;
    let r = reduce_3col(&g);
    if out.is_some() || !check {
        emit(out, &write_sas(&r.task))?;
    }
    if let Some(path) = weights_out {
        let weights = weights_json(&r.task, &r.features, &r.weights);
        emit(Some(path), &format!("{}\n", serde_json::to_string_pretty(&weights).unwrap()))?;
    }
    if check {
        let report = validate(&r.task, &|s: &State| phi_of_state(&r, s), DEFAULT_STATE_CAP)?;
        say(&format!("3-colorable: {}", if report.consistent { "no" } else { "yes" }));
    }
    Ok(())
}
