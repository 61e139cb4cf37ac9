//! Instance generation and the comparison harness: deterministic versus
//! sampled model, and heuristic versus exact optimum.

use std::collections::BTreeSet;
use std::fs::OpenOptions;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{evaluate, Client, CostBreakdown, CostParams, Instance, ScenarioSet};
use crate::oracle::{enumerate_optimal, ORACLE_CLIENT_LIMIT};
use crate::saa::{cross_evaluate, gap_p0_vs_p1};
use crate::scenario::{build_scenario_set, mean_scenario_set, ScenarioConfig};
use crate::seeds::derive_seed;
use crate::vns::{vns_solve, VnsConfig};
use crate::{Error, Result};

/// Random instance: depot at the origin, clients uniform in `[0, 50]^2`, one
/// caregiver per six clients (rounded up) and the standard cost parameters.
pub fn generate_instance(n: usize, seed: u64) -> Instance {
    assert!(n >= 1, "an instance needs at least one client");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clients = (1..=n)
        .map(|id| Client { id, x: rng.random_range(0.0..=50.0), y: rng.random_range(0.0..=50.0) })
        .collect();
    Instance::new([0.0, 0.0], clients, n.div_ceil(6), CostParams::default()).expect("generated instance is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P0VsP1 {
    /// Out-of-sample cost of the deterministic model's solution.
    pub p0: CostBreakdown,
    /// Out-of-sample cost of the sampled model's solution.
    pub p1: CostBreakdown,
    /// `(p0 - p1) / p0`.
    pub gap: f64,
    pub p0_seconds: f64,
    pub p1_seconds: f64,
}

/// Solve the deterministic model on the mean of `m` training scenarios and the
/// sampled model on the scenarios themselves, then evaluate both solutions
/// with their schedules fixed on `m_eval` fresh scenarios. Both solves use
/// the same solver seed.
pub fn run_p0_vs_p1(
    instance: &Instance,
    m: usize,
    m_eval: usize,
    seed: u64,
    scenario: &ScenarioConfig,
    solver: &VnsConfig,
) -> Result<P0VsP1> {
    let training = build_scenario_set(instance, m, derive_seed(seed, 1), scenario)?;
    let eval_set = build_scenario_set(instance, m_eval, derive_seed(seed, 0), scenario)?;
    let mean = mean_scenario_set(&training)?;

    let started = Instant::now();
    let p0 = vns_solve(instance, &mean, solver)?;
    let p0_seconds = started.elapsed().as_secs_f64();
    let started = Instant::now();
    let p1 = vns_solve(instance, &training, solver)?;
    let p1_seconds = started.elapsed().as_secs_f64();

    let p0_cost = cross_evaluate(&p0.best, &eval_set, instance)?.breakdown;
    let p1_cost = cross_evaluate(&p1.best, &eval_set, instance)?.breakdown;
    Ok(P0VsP1 { gap: gap_p0_vs_p1(p0_cost.total, p1_cost.total)?, p0: p0_cost, p1: p1_cost, p0_seconds, p1_seconds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactVsHeuristic {
    pub oracle: CostBreakdown,
    pub vns: CostBreakdown,
    /// `(vns - oracle) / vns`.
    pub gap: f64,
    pub oracle_seconds: f64,
    pub vns_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExactOutcome {
    Compared(ExactVsHeuristic),
    Skipped { reason: String },
}

/// Compare VNS with the exhaustive optimum on the same scenarios.
pub fn run_exact_vs_heuristic(instance: &Instance, scenarios: &ScenarioSet, solver: &VnsConfig) -> Result<ExactOutcome> {
    let n = instance.client_count();
    if n > ORACLE_CLIENT_LIMIT {
        return Ok(ExactOutcome::Skipped {
            reason: format!("{n} clients exceed the exhaustive-search limit of {ORACLE_CLIENT_LIMIT}"),
        });
    }
    let started = Instant::now();
    let (optimal, _) = enumerate_optimal(instance, scenarios)?;
    let oracle_seconds = started.elapsed().as_secs_f64();
    let started = Instant::now();
    let heuristic = vns_solve(instance, scenarios, solver)?;
    let vns_seconds = started.elapsed().as_secs_f64();

    let oracle = evaluate(&optimal, instance, scenarios)?;
    let vns = evaluate(&heuristic.best, instance, scenarios)?;
    // Both costs come from the same evaluator; clamp rounding noise at zero.
    let gap = ((vns.total - oracle.total) / vns.total).max(0.0);
    Ok(ExactOutcome::Compared(ExactVsHeuristic { oracle, vns, gap, oracle_seconds, vns_seconds }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    #[serde(default = "default_instances")]
    pub instances_per_size: usize,
    #[serde(default = "default_sample_sizes")]
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_m_eval")]
    pub m_eval: usize,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Also compare against the exhaustive optimum where the size allows.
    #[serde(default)]
    pub exact: bool,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default = "desk_solver")]
    pub solver: VnsConfig,
}

fn default_instances() -> usize {
    10
}

fn default_sample_sizes() -> Vec<usize> {
    vec![30]
}

fn default_m_eval() -> usize {
    500
}

/// Solver settings for desk-scale runs.
pub fn desk_solver() -> VnsConfig {
    VnsConfig { max_iters: 200, ..VnsConfig::default() }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(Error::InvalidConfig("sizes must be a non-empty list of positive client counts".into()));
        }
        if self.instances_per_size == 0 || self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) {
            return Err(Error::InvalidConfig("instance and sample counts must be positive".into()));
        }
        if self.m_eval == 0 {
            return Err(Error::InvalidConfig("evaluation sample size must be positive".into()));
        }
        self.scenario.validate()?;
        self.solver.validate()
    }

    pub fn report_path(&self, n: usize) -> PathBuf {
        self.output_dir.join(format!("bench_n{n}.csv"))
    }

    /// Seed of instance `index` of size `n`; also seeds its scenarios.
    pub fn instance_seed(&self, n: usize, index: usize) -> u64 {
        derive_seed(self.seed, (n as u64) << 32 | index as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance_id: String,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub model: String,
    pub cost_fixed: f64,
    pub cost_travel: f64,
    pub cost_wait: f64,
    pub cost_overtime: f64,
    pub cost_total: f64,
    pub gap: f64,
    pub seconds: f64,
    pub seed: u64,
}

struct Task {
    instance_id: String,
    instance: Instance,
    seed: u64,
    m: usize,
    /// `true` for the exact comparison, `false` for the model comparison.
    exact: bool,
}

impl Task {
    fn models(&self) -> [&'static str; 2] {
        if self.exact {
            ["oracle", "vns"]
        } else {
            ["P0", "P1"]
        }
    }

    fn row(&self, model: &str, cost: &CostBreakdown, gap: f64, seconds: f64) -> BenchRow {
        BenchRow {
            instance_id: self.instance_id.clone(),
            n: self.instance.client_count(),
            k: self.instance.caregiver_count,
            m: self.m,
            model: model.to_string(),
            cost_fixed: cost.fixed,
            cost_travel: cost.travel,
            cost_wait: cost.wait_penalty,
            cost_overtime: cost.overtime_penalty,
            cost_total: cost.total,
            gap,
            seconds,
            seed: self.seed,
        }
    }

    fn run(&self, config: &BenchConfig) -> Result<Vec<BenchRow>> {
        let solver = VnsConfig { seed: self.seed, ..config.solver.clone() };
        if self.exact {
            let training = build_scenario_set(&self.instance, self.m, derive_seed(self.seed, 1), &config.scenario)?;
            return Ok(match run_exact_vs_heuristic(&self.instance, &training, &solver)? {
                ExactOutcome::Compared(r) => vec![
                    self.row("oracle", &r.oracle, r.gap, r.oracle_seconds),
                    self.row("vns", &r.vns, r.gap, r.vns_seconds),
                ],
                ExactOutcome::Skipped { .. } => Vec::new(),
            });
        }
        let r = run_p0_vs_p1(&self.instance, self.m, config.m_eval, self.seed, &config.scenario, &solver)?;
        Ok(vec![self.row("P0", &r.p0, r.gap, r.p0_seconds), self.row("P1", &r.p1, r.gap, r.p1_seconds)])
    }
}

fn completed_rows(path: &Path) -> Result<BTreeSet<(String, usize, String)>> {
    if !path.exists() {
        return Ok(BTreeSet::new());
    }
    let mut reader = csv::Reader::from_path(path)?;
    let mut done = BTreeSet::new();
    for row in reader.deserialize::<BenchRow>() {
        let row = row?;
        done.insert((row.instance_id, row.m, row.model));
    }
    Ok(done)
}

/// Run every configured comparison, writing one CSV per size. Rows already
/// present in an existing report are not recomputed. Returns the report paths.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    std::fs::create_dir_all(&config.output_dir)?;
    let mut paths = Vec::new();
    for &n in &config.sizes {
        let path = config.report_path(n);
        let done = completed_rows(&path)?;
        let mut tasks = Vec::new();
        for index in 0..config.instances_per_size {
            let seed = config.instance_seed(n, index);
            let instance = generate_instance(n, seed);
            for &m in &config.sample_sizes {
                for exact in [false, true] {
                    if exact && (!config.exact || n > ORACLE_CLIENT_LIMIT) {
                        continue;
                    }
                    let task = Task { instance_id: format!("n{n}-i{index}"), instance: instance.clone(), seed, m, exact };
                    let finished = task.models().iter().all(|model| done.contains(&(task.instance_id.clone(), m, model.to_string())));
                    if !finished {
                        tasks.push(task);
                    }
                }
            }
        }

        let fresh = std::fs::metadata(&path).map_or(true, |m| m.len() == 0);
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        let writer = Mutex::new(csv::WriterBuilder::new().has_headers(false).from_writer(file));
        if fresh {
            // An empty report still carries its header.
            let mut w = writer.lock().expect("report writer poisoned");
            w.write_record([
                "instance_id", "n", "k", "m", "model", "cost_fixed", "cost_travel", "cost_wait", "cost_overtime",
                "cost_total", "gap", "seconds", "seed",
            ])?;
            w.flush()?;
        }
        tasks.par_iter().try_for_each(|task| -> Result<()> {
            let rows = task.run(config)?;
            let mut w = writer.lock().expect("report writer poisoned");
            for row in &rows {
                w.serialize(row)?;
            }
            w.flush()?;
            Ok(())
        })?;
        paths.push(path);
    }
    Ok(paths)
}
