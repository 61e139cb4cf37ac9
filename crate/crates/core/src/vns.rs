//! Variable neighborhood search: shake the incumbent, improve with tabu
//! search, and cycle through the removal neighborhoods.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::construct::build_initial_plan;
use crate::domain::{Evaluator, Instance, Plan, ScenarioSet, Solution};
use crate::neighborhoods::{removal_count, shake, Neighborhood};
use crate::tabu::{tabu_search, TabuConfig};
use crate::{Result, IMPROVEMENT_EPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VnsConfig {
    /// Outer iterations.
    pub max_iters: usize,
    /// Fraction of clients removed by a shake.
    pub removal_fraction: f64,
    /// Tabu iteration cap per outer iteration.
    pub tabu_iters: usize,
    /// Tabu non-improvement cap; `None` means five times the client count.
    pub no_improve_cap: Option<usize>,
    pub tenure_min: usize,
    pub tenure_max: usize,
    pub seed: u64,
    /// Optional wall-clock limit checked between outer iterations.
    pub time_budget_ms: Option<u64>,
}

impl Default for VnsConfig {
    fn default() -> Self {
        VnsConfig {
            max_iters: 1000,
            removal_fraction: 0.2,
            tabu_iters: 1000,
            no_improve_cap: None,
            tenure_min: 5,
            tenure_max: 10,
            seed: 0,
            time_budget_ms: None,
        }
    }
}

impl VnsConfig {
    pub fn validate(&self) -> Result<()> {
        removal_count(1, self.removal_fraction)?;
        self.tabu_config(1).validate()
    }

    pub fn tabu_config(&self, client_count: usize) -> TabuConfig {
        TabuConfig {
            max_iters: self.tabu_iters,
            no_improve_cap: self.no_improve_cap.unwrap_or(5 * client_count),
            tenure_min: self.tenure_min,
            tenure_max: self.tenure_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub iteration: usize,
    /// `None` for the initial solution.
    pub neighborhood: Option<Neighborhood>,
    /// Best cost found by tabu search in this iteration.
    pub candidate_cost: f64,
    pub best_cost: f64,
    pub millis: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchLog {
    pub entries: Vec<LogEntry>,
}

impl SearchLog {
    /// Write as CSV. With `timing` off the millis column is zero, which makes
    /// logs of identical runs byte-identical.
    pub fn write_csv<W: Write>(&self, writer: W, timing: bool) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["iteration", "neighborhood", "cost", "best", "millis"])?;
        for e in &self.entries {
            let nb = e.neighborhood.map_or_else(|| "init".to_string(), |n| n.to_string());
            let millis = if timing { e.millis } else { 0 };
            out.write_record([
                e.iteration.to_string(),
                nb,
                e.candidate_cost.to_string(),
                e.best_cost.to_string(),
                millis.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VnsOutcome {
    pub best: Solution,
    pub cost: f64,
    pub log: SearchLog,
}

/// Ordered set of neighborhoods still available in the current cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodCycle {
    available: Vec<Neighborhood>,
}

impl Default for NeighborhoodCycle {
    fn default() -> Self {
        NeighborhoodCycle { available: Neighborhood::ALL.to_vec() }
    }
}

impl NeighborhoodCycle {
    pub fn current(&self) -> Neighborhood {
        self.available[0]
    }

    pub fn available(&self) -> &[Neighborhood] {
        &self.available
    }

    /// Drop the current neighborhood after a failed iteration, refilling once
    /// all three have failed.
    pub fn reject(&mut self) {
        self.available.remove(0);
        if self.available.is_empty() {
            *self = NeighborhoodCycle::default();
        }
    }
}

/// Search on an evaluator, returning the best plan and the log.
pub fn vns_plan(eval: &Evaluator<'_>, config: &VnsConfig) -> Result<(Plan, SearchLog)> {
    config.validate()?;
    let started = Instant::now();
    let budget = config.time_budget_ms.map(Duration::from_millis);
    let tabu = config.tabu_config(eval.instance().client_count());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut best = build_initial_plan(eval);
    let mut best_cost = best.total();
    let mut log = SearchLog::default();
    log.entries.push(LogEntry {
        iteration: 0,
        neighborhood: None,
        candidate_cost: best_cost,
        best_cost,
        millis: started.elapsed().as_millis() as u64,
    });

    let mut cycle = NeighborhoodCycle::default();
    for iteration in 1..=config.max_iters {
        if budget.is_some_and(|b| started.elapsed() >= b) {
            break;
        }
        let nb = cycle.current();
        let shaken = shake(&best, nb, config.removal_fraction, &mut rng, eval)?;
        let (_, improved) = tabu_search(&shaken, &tabu, &mut rng, eval);
        let candidate_cost = improved.total();
        if candidate_cost < best_cost - IMPROVEMENT_EPS {
            best = improved;
            best_cost = candidate_cost;
        } else {
            cycle.reject();
        }
        log.entries.push(LogEntry {
            iteration,
            neighborhood: Some(nb),
            candidate_cost,
            best_cost,
            millis: started.elapsed().as_millis() as u64,
        });
    }
    Ok((best, log))
}

/// Solve with VNS on the given scenario set.
pub fn vns_solve(instance: &Instance, scenarios: &ScenarioSet, config: &VnsConfig) -> Result<VnsOutcome> {
    let eval = Evaluator::new(instance, scenarios)?;
    let (plan, log) = vns_plan(&eval, config)?;
    Ok(VnsOutcome { best: plan.to_solution(&eval), cost: plan.total(), log })
}
