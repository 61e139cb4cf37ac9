use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use vrasp::bench::{generate_instance, run_bench, BenchConfig};
use vrasp::domain::{evaluate, Instance, PenaltyMode, ScenarioSet, Solution};
use vrasp::oracle::{write_lp, LpExportConfig, LpModel};
use vrasp::saa::{run_saa, SaaConfig};
use vrasp::scenario::{build_scenario_set, mean_scenario_set, ScenarioConfig};
use vrasp::vns::{vns_solve, VnsConfig};
use vrasp::Error;

#[derive(Parser)]
#[command(name = "vrasp", version, about = "Caregiver routing and appointment scheduling")]
struct Cli {
    /// Worker threads for parallel sections (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve with VNS on the mean scenario (det) or on sampled scenarios (saa).
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = SolveModel::Saa)]
        model: SolveModel,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        penalty_mode: Option<PenaltyMode>,
        /// Solution JSON.
        #[arg(long)]
        out: PathBuf,
        /// Search log CSV; defaults to the solution path with a `.log.csv` suffix.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Write zero in the log's millis column so repeated runs match byte for byte.
        #[arg(long)]
        no_timing: bool,
    },
    /// Evaluate a solution with its schedule held fixed.
    Evaluate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        /// Scenario set JSON; otherwise scenarios are sampled from --m and --seed.
        #[arg(long)]
        scenarios: Option<PathBuf>,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long)]
        penalty_mode: Option<PenaltyMode>,
    },
    /// Sample average approximation with lower and upper bound estimates.
    Saa {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 5)]
        q: usize,
        #[arg(long, default_value_t = 30)]
        m: usize,
        #[arg(long, default_value_t = 500)]
        m_eval: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        penalty_mode: Option<PenaltyMode>,
        /// Report JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the MILP as a CPLEX LP file.
    ExportLp {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        model: ExportModel,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long)]
        big_m: Option<f64>,
        #[arg(long)]
        penalty_mode: Option<PenaltyMode>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the comparison harness described by a JSON config.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveModel {
    Det,
    Saa,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportModel {
    P0,
    P1,
}

#[derive(Args)]
struct Sampling {
    /// Scenario count.
    #[arg(long, default_value_t = 30)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SolverArgs {
    /// Outer VNS iterations.
    #[arg(long, default_value_t = 1000)]
    tau: usize,
    /// Fraction of clients removed per shake.
    #[arg(long, default_value_t = 0.2)]
    r: f64,
    /// Tabu search iteration cap.
    #[arg(long, default_value_t = 1000)]
    tabu_iters: usize,
    #[arg(long, default_value_t = 5)]
    tenure_min: usize,
    #[arg(long, default_value_t = 10)]
    tenure_max: usize,
    /// Wall-clock limit for one solve, in milliseconds.
    #[arg(long)]
    time_budget_ms: Option<u64>,
}

impl SolverArgs {
    fn config(&self, seed: u64) -> VnsConfig {
        VnsConfig {
            max_iters: self.tau,
            removal_fraction: self.r,
            tabu_iters: self.tabu_iters,
            no_improve_cap: None,
            tenure_min: self.tenure_min,
            tenure_max: self.tenure_max,
            seed,
            time_budget_ms: self.time_budget_ms,
        }
    }
}

fn read_instance(path: &Path, mode: Option<PenaltyMode>) -> Result<Instance, Error> {
    let text = fs::read_to_string(path)?;
    let mut instance: Instance = serde_json::from_str(&text)?;
    if let Some(mode) = mode {
        instance.params.penalty_mode = mode;
    }
    Ok(instance)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn sample(instance: &Instance, sampling: &Sampling) -> Result<ScenarioSet, Error> {
    build_scenario_set(instance, sampling.m, sampling.seed, &ScenarioConfig::default())
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    model: &'a str,
    m: usize,
    seed: u64,
    cost: vrasp::domain::CostBreakdown,
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Gen { n, seed, out } => write_json(&out, &generate_instance(n as usize, seed)),
        Command::Solve { instance, model, sampling, solver, penalty_mode, out, log, no_timing } => {
            let instance = read_instance(&instance, penalty_mode)?;
            let training = sample(&instance, &sampling)?;
            let (label, scenarios) = match model {
                SolveModel::Det => ("det", mean_scenario_set(&training)?),
                SolveModel::Saa => ("saa", training),
            };
            let outcome = vns_solve(&instance, &scenarios, &solver.config(sampling.seed))?;
            write_json(&out, &outcome.best)?;
            let log = log.unwrap_or_else(|| out.with_extension("log.csv"));
            outcome.log.write_csv(fs::File::create(log)?, !no_timing)?;
            let cost = evaluate(&outcome.best, &instance, &scenarios)?;
            let summary = SolveSummary { model: label, m: sampling.m, seed: sampling.seed, cost };
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(())
        }
        Command::Evaluate { instance, solution, scenarios, sampling, penalty_mode } => {
            let instance = read_instance(&instance, penalty_mode)?;
            let solution: Solution = read_json(&solution)?;
            let scenarios = match scenarios {
                Some(path) => read_json(&path)?,
                None => sample(&instance, &sampling)?,
            };
            let cost = evaluate(&solution, &instance, &scenarios)?;
            println!("{}", serde_json::to_string_pretty(&cost)?);
            Ok(())
        }
        Command::Saa { instance, q, m, m_eval, seed, solver, penalty_mode, out } => {
            let instance = read_instance(&instance, penalty_mode)?;
            let config = SaaConfig { q, m, m_eval, seed, scenario: ScenarioConfig::default(), solver: solver.config(seed) };
            let report = run_saa(&instance, &config)?;
            write_json(&out, &report)?;
            println!("{report}");
            Ok(())
        }
        Command::ExportLp { instance, model, sampling, big_m, penalty_mode, out } => {
            let instance = read_instance(&instance, penalty_mode)?;
            let scenarios = sample(&instance, &sampling)?;
            let model = match model {
                ExportModel::P0 => LpModel::P0,
                ExportModel::P1 => LpModel::P1,
            };
            write_lp(&instance, &scenarios, &LpExportConfig { model, big_m }, &out)
        }
        Command::Bench { config } => {
            let config: BenchConfig = read_json(&config)?;
            for path in run_bench(&config)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Io(_) => 4,
        Error::Json(e) if e.is_io() => 4,
        Error::Csv(e) if e.is_io_error() => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
