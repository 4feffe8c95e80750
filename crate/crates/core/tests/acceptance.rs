//! Acceptance suite: runs every criterion, prints one line per criterion and
//! exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use potplan_core::bucket::{
    bucket_eliminate, build_general_lp, context_dependency_graph, induced_width, min_fill_order,
    to_lp_constraints, ScopedFunction, ScopedFunctionSet,
};
use potplan_core::cost_partitioning::{all_projections, build_ocp_lp, build_tcp_lp, features_of_abstractions};
use potplan_core::feature::generate_features;
use potplan_core::generator::random_feature_set;
use potplan_core::hardness::{is_3colorable, phi_of_state, reduce_3col, Graph};
use potplan_core::lp::{LinearExpression, LpModel, LpSolver, Relation, Sense, SimplexSolver};
use potplan_core::potential::{build_exhaustive_lp, direct2d_row_count, Direct2dLp};
use potplan_core::search::{astar, validate, validate_on};
use potplan_core::task::{State, StateIndexer};
use potplan_core::transition::{build_transition_system, goal_distances};

use common::{close, potential, suite_task};

const CAP: u128 = 100_000;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

fn e(terms: &[(usize, f64)]) -> LinearExpression {
    LinearExpression::from_terms(0.0, terms.iter().copied())
}

fn criterion1() -> Outcome {
    let domains = vec![2, 2];
    let mut psi = ScopedFunctionSet::new(domains.clone(), 2);
    psi.push(ScopedFunction::new(vec![0], &domains, vec![e(&[(0, 3.0), (1, -2.0)]), e(&[(0, 4.0), (1, 2.0)])]).unwrap());
    psi.push(
        ScopedFunction::new(
            vec![0, 1],
            &domains,
            vec![e(&[(0, 8.0)]), e(&[(1, 7.0)]), e(&[(1, -3.0)]), LinearExpression::zero()],
        )
        .unwrap(),
    );
    let es = bucket_eliminate(&psi, &[0, 1]).map_err(|e| e.to_string())?;
    let names = |i: usize| ["a", "b"][i].to_string();
    let shown = es.display(&names).to_string();
    let expected = "Aux1 = max{8a, 7b}\nAux2 = max{-3b, 0}\nAux3 = max{3a - 2b + Aux1, 4a + 2b + Aux2}\nAux4 = Aux3\n";
    ensure!(shown == expected, "equations differ:\n{shown}");
    let mut model = LpModel::new();
    let a = model.add_free("a");
    let b = model.add_free("b");
    let enc = to_lp_constraints(&es, &mut model, &|i| [a, b][i]);
    ensure!(enc.rows.len() == 6, "{} rows", enc.rows.len());
    ensure!(model.rows.iter().all(|r| r.relation == Relation::Ge), "non-≥ row");
    Ok("4 equations, 6 ≥-rows".into())
}

fn criterion2_3_9() -> (Outcome, Outcome, Outcome) {
    let solver = SimplexSolver::default();
    let mut c2: Outcome = Ok(String::new());
    let mut c3: Outcome = Ok(String::new());
    let mut c9: Outcome = Ok(String::new());
    let mut nontrivial = 0;
    for seed in 0..100 {
        let task = suite_task(seed);
        let ts = build_transition_system(&task, CAP).unwrap();
        let s0 = [task.initial_state.clone()];
        for dim in [1, 2] {
            let fs = generate_features(&task, dim, None).unwrap();
            let lp = Direct2dLp::build(&task, &fs).unwrap();
            if c9.is_ok() && lp.model.num_rows() != direct2d_row_count(&task, &fs) {
                c9 = Err(format!("seed {seed} dim {dim}: {} rows", lp.model.num_rows()));
            }
            if dim == 1 {
                continue;
            }
            let direct = lp.into_potential_lp().solve_for_states(&fs, &s0, &solver).unwrap();
            let exhaustive = build_exhaustive_lp(&task, &fs, CAP)
                .unwrap()
                .solve_for_states(&fs, &s0, &solver)
                .unwrap();
            if direct.value > 1e-6 {
                nontrivial += 1;
            }
            if c2.is_ok() && !close(direct.value, exhaustive.value, 1e-6) {
                c2 = Err(format!("seed {seed}: direct2d {} vs exhaustive {}", direct.value, exhaustive.value));
            }
            let report = validate_on(&ts, &potential(&task, &fs, &direct.weights));
            if c2.is_ok() && !report.all_hold() {
                c2 = Err(format!("seed {seed}: extracted weights fail validation: {report:?}"));
            }

            let general = build_general_lp(&task, &fs, None).unwrap();
            if c3.is_ok() && general.max_width() != 0 {
                c3 = Err(format!("seed {seed}: w* = {}", general.max_width()));
            }
            for op in 0..task.operators.len() {
                if c3.is_ok() && !context_dependency_graph(&task, &fs, op).is_edgeless() {
                    c3 = Err(format!("seed {seed}: operator {op} has context edges"));
                }
            }
            let bucket = general.into_potential_lp().solve_for_states(&fs, &s0, &solver).unwrap();
            if c3.is_ok() && !close(bucket.value, direct.value, 1e-6) {
                c3 = Err(format!("seed {seed}: bucket {} vs direct2d {}", bucket.value, direct.value));
            }
        }
    }
    let tag = |r: Outcome, msg: String| r.map(|_| msg);
    (
        tag(c2, format!("100 tasks, {nontrivial} with positive optimum")),
        tag(c3, "100 tasks, all graphs edge-free".into()),
        tag(c9, "200 LPs with exact row counts".into()),
    )
}

fn brute_force_max(psi: &ScopedFunctionSet) -> f64 {
    let all = StateIndexer::new(&psi.domains);
    (0..all.count())
        .map(|i| psi.sum_at(&all.unrank(i)).constant)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn criterion4() -> Outcome {
    let solver = SimplexSolver::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for instance in 0..200 {
        let n = rng.gen_range(1..=4);
        let domains: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
        let mut psi = ScopedFunctionSet::new(domains.clone(), 0);
        for _ in 0..rng.gen_range(0..=5) {
            let k = rng.gen_range(0..=n.min(3));
            let mut scope = rand::seq::index::sample(&mut rng, n, k).into_vec();
            scope.sort_unstable();
            let size: usize = scope.iter().map(|&v| domains[v]).product();
            let table = (0..size).map(|_| LinearExpression::constant(rng.gen_range(-9..=9) as f64)).collect();
            psi.push(ScopedFunction::new(scope, &domains, table).unwrap());
        }
        let order: Vec<usize> = if instance % 2 == 0 {
            min_fill_order(&psi.dependency_graph())
        } else {
            let mut o: Vec<usize> = (0..n).collect();
            o.shuffle(&mut rng);
            o
        };
        let width = induced_width(&psi.dependency_graph(), &order);
        let max = brute_force_max(&psi);
        let es = bucket_eliminate(&psi, &order).unwrap();
        let (_, evaluated) = es.evaluate(&[]);
        ensure!(evaluated == max, "instance {instance}: equations give {evaluated}, Max is {max}");

        let mut model = LpModel::new();
        let enc = to_lp_constraints(&es, &mut model, &|i| i);
        model.set_objective(Sense::Minimize, enc.result.clone());
        let sol = solver.solve(&model).map_err(|e| e.to_string())?;
        let value = sol.objective_value.unwrap_or(f64::NAN);
        ensure!(close(value, max, 1e-9), "instance {instance}: LP minimum {value}, Max is {max}");

        let d = *domains.iter().max().unwrap() as u32;
        let aux_bound = n * d.pow(width as u32) as usize;
        let row_bound = n * d.pow(width as u32 + 1) as usize;
        ensure!(enc.aux_vars.len() <= aux_bound, "instance {instance}: {} aux > {aux_bound}", enc.aux_vars.len());
        ensure!(enc.rows.len() <= row_bound, "instance {instance}: {} rows > {row_bound}", enc.rows.len());
    }
    Ok("200 instances".into())
}

fn criterion5() -> Outcome {
    let solver = SimplexSolver::default();
    let mut widths = 0;
    for seed in 0..30 {
        let task = suite_task(1000 + seed);
        let fs = random_feature_set(&task, 3, 8, seed);
        let s0 = [task.initial_state.clone()];
        let general = build_general_lp(&task, &fs, None).map_err(|e| e.to_string())?;
        widths = widths.max(general.max_width());
        let bucket = general.into_potential_lp().solve_for_states(&fs, &s0, &solver).unwrap();
        let exhaustive = build_exhaustive_lp(&task, &fs, CAP)
            .unwrap()
            .solve_for_states(&fs, &s0, &solver)
            .unwrap();
        ensure!(
            close(bucket.value, exhaustive.value, 1e-6),
            "seed {seed}: bucket {} vs exhaustive {}",
            bucket.value,
            exhaustive.value
        );
    }
    Ok(format!("30 tasks, largest w* = {widths}"))
}

fn criterion6() -> Outcome {
    let solver = SimplexSolver::default();
    let mut strict = 0;
    let mut checked = 0;
    for seed in 0..30 {
        let task = suite_task(2000 + seed);
        let ts = build_transition_system(&task, CAP).unwrap();
        let h_star = goal_distances(&ts);
        let abstractions = all_projections(&ts, 2).unwrap();
        let (fs, _) = features_of_abstractions(&abstractions).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut solvable: Vec<usize> = (0..ts.num_states())
            .filter(|&s| h_star[s].is_finite() && s != ts.initial)
            .collect();
        solvable.shuffle(&mut rng);
        let mut states = vec![task.initial_state.clone()];
        states.extend(solvable.iter().take(3).map(|&s| ts.state(s)));

        for s in &states {
            let pot = Direct2dLp::build(&task, &fs)
                .unwrap()
                .into_potential_lp()
                .solve_for_states(&fs, std::slice::from_ref(s), &solver)
                .unwrap();
            let tcp = solver.solve(&build_tcp_lp(&ts, &abstractions, s).model).unwrap();
            let ocp = solver.solve(&build_ocp_lp(&ts, &abstractions, s).model).unwrap();
            let (tcp, ocp) = (tcp.objective_value.unwrap(), ocp.objective_value.unwrap());
            ensure!(close(pot.value, tcp, 1e-6), "seed {seed} state {s}: potential {} vs TCP {tcp}", pot.value);
            ensure!(tcp >= ocp - 1e-6, "seed {seed} state {s}: TCP {tcp} < OCP {ocp}");
            if tcp > ocp + 1e-6 {
                strict += 1;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} states, TCP > OCP on {strict}"))
}

fn criterion7() -> Outcome {
    let mut family = vec![
        Graph::complete(3).unwrap(),
        Graph::complete(4).unwrap(),
        Graph::complete(5).unwrap(),
        Graph::cycle(5).unwrap(),
        Graph::new(5).unwrap(),
        Graph::new(1).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for seed in 0..20 {
        family.push(Graph::random(rng.gen_range(2..=5), rng.gen_range(0.3..0.9), seed).unwrap());
    }
    let mut colorable = 0;
    for (i, g) in family.iter().enumerate() {
        let r = reduce_3col(g);
        let report = validate(&r.task, &|s: &State| phi_of_state(&r, s), 1_000_000).map_err(|e| e.to_string())?;
        let col = is_3colorable(g).unwrap();
        colorable += col as usize;
        ensure!(report.consistent == !col, "graph {i} ({} edges): consistent {}, 3-colorable {col}", g.num_edges(), report.consistent);
    }
    Ok(format!("{} graphs, {colorable} 3-colorable", family.len()))
}

fn criterion8() -> Outcome {
    let solver = SimplexSolver::default();
    let mut totals = [0usize; 3];
    for seed in 0..50 {
        let task = suite_task(3000 + seed);
        let ts = build_transition_system(&task, CAP).unwrap();
        let h_star = goal_distances(&ts)[ts.initial];
        let blind = astar(&task, &|_| 0.0).map_err(|e| e.to_string())?;
        let mut results = vec![blind];
        for dim in [1, 2] {
            let fs = generate_features(&task, dim, None).unwrap();
            let w = Direct2dLp::build(&task, &fs)
                .unwrap()
                .into_potential_lp()
                .solve_for_states(&fs, std::slice::from_ref(&task.initial_state), &solver)
                .unwrap()
                .weights;
            results.push(astar(&task, &potential(&task, &fs, &w)).map_err(|e| e.to_string())?);
        }
        for (k, r) in results.iter().enumerate() {
            ensure!(close(r.cost, h_star, 1e-6), "seed {seed} heuristic {k}: cost {} vs h* {h_star}", r.cost);
        }
        totals[0] += results[0].expansions;
        totals[1] += results[1].expansions_before_last_f_layer;
        totals[2] += results[2].expansions_before_last_f_layer;
    }
    ensure!(
        totals[2] <= totals[1] && totals[1] <= totals[0],
        "aggregate expansions pot2 {} pot1 {} blind {}",
        totals[2],
        totals[1],
        totals[0]
    );
    Ok(format!("expansions pot2 {} <= pot1 {} <= blind {}", totals[2], totals[1], totals[0]))
}

fn run(name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    report(name, limit, start.elapsed(), outcome)
}

fn report(name: &str, limit: Duration, elapsed: Duration, outcome: Outcome) -> bool {
    let outcome = match outcome {
        Ok(_) if elapsed > limit => Err(format!("took {elapsed:.1?}, limit {limit:?}")),
        other => other,
    };
    match &outcome {
        Ok(msg) => println!("PASS {name}: {msg} ({elapsed:.2?})"),
        Err(msg) => println!("FAIL {name}: {msg} ({elapsed:.2?})"),
    }
    outcome.is_ok()
}

fn main() -> ExitCode {
    let mut ok = true;
    ok &= run("1 bucket elimination example", Duration::from_secs(1), criterion1);

    let start = Instant::now();
    let (c2, c3, c9) = catch_unwind(criterion2_3_9).unwrap_or_else(|_| {
        let e = || Err("panicked".to_string());
        (e(), e(), e())
    });
    let shared = start.elapsed();
    ok &= report("2 direct2d equals exhaustive LP", Duration::from_secs(300), shared, c2);
    ok &= report("3 bucket equals direct2d", Duration::from_secs(300), shared, c3);

    ok &= run("4 numeric Max oracle", Duration::from_secs(60), criterion4);
    ok &= run("5 dimension-3 equivalence", Duration::from_secs(600), criterion5);
    ok &= run("6 TCP equivalence and dominance", Duration::from_secs(600), criterion6);
    ok &= run("7 hardness reduction", Duration::from_secs(120), criterion7);
    ok &= run("8 search", Duration::from_secs(300), criterion8);
    ok &= report("9 direct2d size formula", Duration::from_secs(300), shared, c9);
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
