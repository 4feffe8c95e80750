//! `potplan`: build, solve and check potential-heuristic LPs for planning
//! tasks in Fast Downward's output.sas format.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use potplan_core::potential::Objective;
use potplan_core::transition::DEFAULT_STATE_CAP;

#[derive(Parser, Debug)]
#[command(name = "potplan", version, about = "Potential heuristics for classical planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and check a task, print a summary.
    ValidateTask {
        task: PathBuf,
    },
    /// Convert a task to transition normal form.
    Tnf {
        task: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Build a potential LP and write it in CPLEX LP format.
    Lp {
        #[command(flatten)]
        lp: LpArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Solve a potential LP and print the optimum and weights.
    Solve {
        #[command(flatten)]
        lp: LpArgs,
        /// Also write the weights as JSON to this file.
        #[arg(long)]
        weights_out: Option<PathBuf>,
        /// Also report weights shifted so that the goal state has potential 0.
        #[arg(long)]
        shifted: bool,
    },
    /// A* search with a blind or potential heuristic.
    Search {
        task: PathBuf,
        /// blind, pot1, pot2 or weights:<file>
        #[arg(long, default_value = "pot2", value_parser = parse_heuristic)]
        heuristic: Heuristic,
        /// Include wall-clock time in the output.
        #[arg(long)]
        timing: bool,
    },
    /// Check goal-awareness, consistency and admissibility of a weight file.
    Validate {
        task: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        cap: u128,
    },
    /// Compare potential, cost-partitioning and perfect heuristic values.
    Compare {
        task: PathBuf,
        /// `init` or comma-separated values, one per variable.
        #[arg(long, default_value = "init")]
        state: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value_t = 20_000)]
        cap: u128,
    },
    /// Induced widths of the per-operator context-dependency graphs.
    Width {
        task: PathBuf,
        #[command(flatten)]
        features: FeatureArgs,
        /// One elimination order per line, in operator order.
        #[arg(long)]
        order: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Build the 3-coloring reduction for a DIMACS graph.
    Reduce3col {
        graph: PathBuf,
        /// Run the explicit consistency test and report colorability.
        #[arg(long)]
        check: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        weights_out: Option<PathBuf>,
    },
    /// Generate a random task.
    Gen {
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=8))]
        vars: u64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(2..=5))]
        dom: u64,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..=64))]
        ops: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=8))]
        max_op_vars: u64,
        #[arg(long, default_value_t = 1)]
        min_cost: u32,
        #[arg(long, default_value_t = 3)]
        max_cost: u32,
        /// Generate a task outside transition normal form.
        #[arg(long)]
        general: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct FeatureArgs {
    /// Use all conjunctions of up to this many facts.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    dim: u64,
    /// Explicit feature list, one `var=val & var=val` conjunction per line.
    #[arg(long)]
    features: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct LpArgs {
    task: PathBuf,
    #[command(flatten)]
    features: FeatureArgs,
    /// Defaults to direct2d up to dimension 2, bucket above.
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// `init` or `samples:N`
    #[arg(long, default_value = "init", value_parser = parse_objective)]
    objective: Objective,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-operator elimination orders for the bucket method.
    #[arg(long)]
    order: Option<PathBuf>,
    /// State limit for the exhaustive method.
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    cap: u128,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    Direct2d,
    Bucket,
    Exhaustive,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Heuristic {
    Blind,
    Potential(usize),
    Weights(PathBuf),
}

fn parse_heuristic(s: &str) -> Result<Heuristic, String> {
    match s {
        "blind" => Ok(Heuristic::Blind),
        "pot1" => Ok(Heuristic::Potential(1)),
        "pot2" => Ok(Heuristic::Potential(2)),
        _ => match s.strip_prefix("weights:") {
            Some(path) if !path.is_empty() => Ok(Heuristic::Weights(PathBuf::from(path))),
            _ => Err(format!("expected blind, pot1, pot2 or weights:<file>, got {s:?}")),
        },
    }
}

fn parse_objective(s: &str) -> Result<Objective, String> {
    s.parse()
}

/// Usage errors exit with 2, everything else with 1.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(String),
}

impl From<potplan_core::Error> for Failure {
    fn from(e: potplan_core::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
