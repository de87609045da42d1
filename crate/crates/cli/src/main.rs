//! `gathering` command-line tool.

mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gathering::algorithms::{gather_a_program, gather_n_program, AlgorithmName, DedicatedProgram};
use gathering::assumption::{build_dependent_counterexample, is_independent, AssumptionSet};
use gathering::config::{classify, ConfigError, FeasibilityKind, InitialConfiguration};
use gathering::engine::{default_horizon, run, AgentProgram, Verdict};
use gathering::sweep::{run_sweep, SweepSpec};

const EXIT_USAGE: u8 = 64;
const EXIT_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "gathering",
    version,
    about = "Gathering of mobile agents with different wake-up times"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Class {
    Good,
    Bad,
    Ungatherable,
}

impl From<Class> for FeasibilityKind {
    fn from(c: Class) -> Self {
        match c {
            Class::Good => FeasibilityKind::Good,
            Class::Bad => FeasibilityKind::Bad,
            Class::Ungatherable => FeasibilityKind::Ungatherable,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify a configuration file. Exit code 0 ungatherable, 1 bad, 2 good.
    Classify { file: PathBuf },
    /// Simulate an algorithm on a configuration file.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        algorithm: AlgorithmName,
        #[arg(long)]
        assumption_set: Option<AssumptionSet>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Write the event trace as JSON Lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write a trajectory plot.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Check whether an assumption set is independent. Exit code 1 if dependent.
    CheckIndependence { set: AssumptionSet },
    /// Write a configuration on which GATHER(A) fails for a dependent set.
    Counterexample {
        #[arg(long)]
        set: AssumptionSet,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an algorithm on seeded random configurations of one class.
    Sweep {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        class: Class,
        #[arg(long, default_value = "gather-n")]
        algorithm: AlgorithmName,
        #[arg(long)]
        assumption_set: Option<AssumptionSet>,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 2.0)]
        spatial_scale: f64,
        #[arg(long, default_value_t = 2.0)]
        time_scale: f64,
        #[arg(long)]
        horizon: Option<f64>,
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn runtime(err: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_FAILURE,
            message: err.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn load(path: &Path) -> Result<InitialConfiguration, Failure> {
    InitialConfiguration::load(path).map_err(|e| match e {
        ConfigError::Io(io) => Failure::runtime(format!("cannot read {}: {io}", path.display())),
        other => Failure::runtime(other),
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", path.display())))
}

fn cmd_classify(file: &Path) -> CmdResult {
    let class = classify(&load(file)?);
    match class.witness {
        Some((i, j)) => println!("{} (witness {i},{j})", class.kind),
        None => println!("{}", class.kind),
    }
    Ok(match class.kind {
        FeasibilityKind::Ungatherable => 0,
        FeasibilityKind::Bad => 1,
        FeasibilityKind::Good => 2,
    })
}

fn program(
    cfg: &InitialConfiguration,
    algorithm: AlgorithmName,
    set: Option<&AssumptionSet>,
) -> Result<Box<dyn AgentProgram>, Failure> {
    Ok(match algorithm {
        AlgorithmName::Dedicated => Box::new(DedicatedProgram::new(cfg).map_err(Failure::runtime)?),
        AlgorithmName::GatherN => Box::new(gather_n_program(cfg.len())),
        AlgorithmName::GatherA => {
            let set = set.ok_or_else(|| Failure::usage("gather-a needs --assumption-set"))?;
            Box::new(gather_a_program(set))
        }
    })
}

fn cmd_simulate(
    file: &Path,
    algorithm: AlgorithmName,
    set: Option<&AssumptionSet>,
    horizon: Option<f64>,
    trace_out: Option<&Path>,
    svg_out: Option<&Path>,
) -> CmdResult {
    if algorithm == AlgorithmName::GatherA && set.is_none() {
        return Err(Failure::usage("gather-a needs --assumption-set"));
    }
    let cfg = load(file)?;
    let program = program(&cfg, algorithm, set)?;
    let horizon = horizon.unwrap_or_else(|| default_horizon(&cfg));
    let trace = run(&cfg, program.as_ref(), horizon).map_err(Failure::runtime)?;
    if let Some(path) = trace_out {
        write_file(path, &trace.to_jsonl())?;
    }
    if let Some(path) = svg_out {
        write_file(path, &svg::render(&trace, cfg.epsilon()))?;
    }
    match &trace.verdict {
        Verdict::Gathered { point } => {
            let t = trace.gathering_time().unwrap_or(trace.end_time);
            println!(
                "GATHERED at ({},{}) t={}",
                num(point.x),
                num(point.y),
                num(t)
            );
        }
        Verdict::Split { groups, .. } => {
            println!("SPLIT {groups} groups t={}", num(trace.end_time))
        }
        Verdict::Timeout => println!("TIMEOUT at t={}", num(trace.end_time)),
    }
    println!("GA events: {}", trace.ga_count());
    Ok(if trace.verdict.is_gathered() { 0 } else { 1 })
}

fn cmd_check_independence(set: &AssumptionSet) -> CmdResult {
    let result = is_independent(set);
    println!("{result}");
    Ok(if result.is_independent() { 0 } else { 1 })
}

fn cmd_counterexample(set: &AssumptionSet, epsilon: f64, out: &Path) -> CmdResult {
    let cfg = build_dependent_counterexample(set, epsilon).map_err(Failure::runtime)?;
    write_file(out, &cfg.to_json_string())?;
    println!("wrote {} agents to {}", cfg.len(), out.display());
    Ok(0)
}

fn execute(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Classify { file } => cmd_classify(&file),
        Command::Simulate {
            file,
            algorithm,
            assumption_set,
            horizon,
            trace,
            svg,
        } => cmd_simulate(
            &file,
            algorithm,
            assumption_set.as_ref(),
            horizon,
            trace.as_deref(),
            svg.as_deref(),
        ),
        Command::CheckIndependence { set } => cmd_check_independence(&set),
        Command::Counterexample { set, epsilon, out } => cmd_counterexample(&set, epsilon, &out),
        Command::Sweep {
            n,
            count,
            seed,
            class,
            algorithm,
            assumption_set,
            epsilon,
            spatial_scale,
            time_scale,
            horizon,
            json,
        } => {
            if algorithm == AlgorithmName::GatherA && assumption_set.is_none() {
                return Err(Failure::usage("gather-a needs --assumption-set"));
            }
            let mut spec = SweepSpec::new(n, count, seed, class.into());
            spec.algorithm = algorithm;
            spec.assumption_set = assumption_set;
            spec.epsilon = epsilon;
            spec.spatial_scale = spatial_scale;
            spec.time_scale = time_scale;
            spec.horizon = horizon;
            let report = run_sweep(&spec).map_err(Failure::runtime)?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).map_err(Failure::runtime)?
                );
            } else {
                print!("{report}");
            }
            Ok(if report.violations().next().is_none() {
                0
            } else {
                1
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
