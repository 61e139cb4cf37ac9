//! Sample average approximation: solve several sampled problems, estimate
//! lower and upper bounds on the true optimum, and report the gap.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{evaluate, evaluate_per_scenario, Instance, ScenarioCosts, ScenarioSet, Solution};
use crate::scenario::{build_scenario_set, ScenarioConfig};
use crate::seeds::derive_seed;
use crate::vns::{vns_solve, VnsConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaaConfig {
    /// Number of replications.
    pub q: usize,
    /// Training scenarios per replication.
    pub m: usize,
    /// Scenarios in the shared evaluation set.
    pub m_eval: usize,
    pub seed: u64,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub solver: VnsConfig,
}

impl Default for SaaConfig {
    fn default() -> Self {
        SaaConfig {
            q: 5,
            m: 30,
            m_eval: 500,
            seed: 0,
            scenario: ScenarioConfig::default(),
            solver: VnsConfig::default(),
        }
    }
}

impl SaaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q == 0 || self.m == 0 {
            return Err(Error::InvalidConfig("q and m must both be at least 1".into()));
        }
        if self.m_eval < self.m {
            return Err(Error::InvalidConfig(format!(
                "evaluation sample ({}) must not be smaller than the training sample ({})",
                self.m_eval, self.m
            )));
        }
        self.scenario.validate()?;
        self.solver.validate()
    }

    /// Seed of the training set for replication `q`.
    pub fn training_seed(&self, q: usize) -> u64 {
        derive_seed(self.seed, 1 + q as u64)
    }

    pub fn evaluation_seed(&self) -> u64 {
        derive_seed(self.seed, 0)
    }

    /// Solver seed for replication `q`.
    pub fn solver_seed(&self, q: usize) -> u64 {
        derive_seed(self.solver.seed, 1 + q as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub index: usize,
    pub training_seed: u64,
    pub solution: Solution,
    /// Objective of the replication's own sampled problem.
    pub training_cost: f64,
    /// Out-of-sample cost on the evaluation set.
    pub ub: f64,
    pub ub_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaaReport {
    pub replications: Vec<Replication>,
    pub lb_mean: f64,
    pub lb_variance: f64,
    /// Index of the replication with the smallest out-of-sample cost.
    pub selected: usize,
    pub ub: f64,
    pub ub_variance: f64,
    pub gap: f64,
    pub gap_variance: f64,
}

impl SaaReport {
    pub fn selected_solution(&self) -> &Solution {
        &self.replications[self.selected].solution
    }
}

impl fmt::Display for SaaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>4} {:>12} {:>12} {:>12}", "rep", "train", "eval", "eval var")?;
        for r in &self.replications {
            let mark = if r.index == self.selected { "*" } else { " " };
            writeln!(f, "{:>3}{mark} {:>12.3} {:>12.3} {:>12.5}", r.index, r.training_cost, r.ub, r.ub_variance)?;
        }
        writeln!(f, "lower bound  {:.3} (var {:.5})", self.lb_mean, self.lb_variance)?;
        writeln!(f, "upper bound  {:.3} (var {:.5})", self.ub, self.ub_variance)?;
        write!(f, "gap          {:.3} (var {:.5})", self.gap, self.gap_variance)
    }
}

/// Sum of squared deviations from the mean, computed on values shifted by the
/// first element so identical inputs give exactly zero.
fn squared_deviations(values: &[f64]) -> f64 {
    let Some(&pivot) = values.first() else {
        return 0.0;
    };
    let n = values.len() as f64;
    let (sum, sum_sq) = values.iter().fold((0.0, 0.0), |(s, sq), &v| {
        let d = v - pivot;
        (s + d, sq + d * d)
    });
    (sum_sq - sum * sum / n).max(0.0)
}

/// Variance of the mean of replication optima: `sum (c - mean)^2 / (Q (Q - 1))`.
/// Zero for a single replication.
pub fn lb_variance(costs: &[f64]) -> f64 {
    let q = costs.len();
    if q < 2 {
        return 0.0;
    }
    squared_deviations(costs) / (q * (q - 1)) as f64
}

/// Variance of an out-of-sample estimate from its per-scenario totals:
/// `sum (c_m - mean)^2 / (M (M - 1))`. Zero for a single scenario.
pub fn ub_variance(per_scenario: &[f64]) -> f64 {
    lb_variance(per_scenario)
}

/// Out-of-sample cost of a fixed solution (routes and schedule).
pub fn cross_evaluate(solution: &Solution, eval_set: &ScenarioSet, instance: &Instance) -> Result<ScenarioCosts> {
    evaluate_per_scenario(solution, instance, eval_set)
}

/// Relative saving of the stochastic model over the deterministic one.
pub fn gap_p0_vs_p1(p0_cost: f64, p1_cost: f64) -> Result<f64> {
    if !(p0_cost > 0.0) {
        return Err(Error::NonPositiveBaseline(p0_cost));
    }
    Ok((p0_cost - p1_cost) / p0_cost)
}

/// Assemble a report from solved replications and an evaluation set.
pub fn assemble_report(
    solutions: Vec<(u64, Solution)>,
    training: &[ScenarioSet],
    eval_set: &ScenarioSet,
    instance: &Instance,
) -> Result<SaaReport> {
    let replications = solutions
        .into_par_iter()
        .zip(training.par_iter())
        .enumerate()
        .map(|(index, ((training_seed, solution), set))| {
            let training_cost = evaluate(&solution, instance, set)?.total;
            let costs = cross_evaluate(&solution, eval_set, instance)?;
            Ok(Replication {
                index,
                training_seed,
                solution,
                training_cost,
                ub: costs.breakdown.total,
                ub_variance: ub_variance(&costs.per_scenario),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let training_costs: Vec<f64> = replications.iter().map(|r| r.training_cost).collect();
    let lb_mean = training_costs.iter().sum::<f64>() / training_costs.len() as f64;
    let lb_var = lb_variance(&training_costs);
    let selected = replications
        .iter()
        .fold(0, |best, r| if r.ub < replications[best].ub { r.index } else { best });
    let ub = replications[selected].ub;
    let ub_var = replications[selected].ub_variance;
    Ok(SaaReport {
        replications,
        lb_mean,
        lb_variance: lb_var,
        selected,
        ub,
        ub_variance: ub_var,
        gap: ub - lb_mean,
        gap_variance: lb_var + ub_var,
    })
}

/// Solve each training set with VNS and evaluate on `eval_set`.
pub fn run_saa_with_sets(
    instance: &Instance,
    training: &[ScenarioSet],
    eval_set: &ScenarioSet,
    solver: &VnsConfig,
) -> Result<SaaReport> {
    if training.is_empty() {
        return Err(Error::InvalidConfig("at least one training set is required".into()));
    }
    solver.validate()?;
    let solutions = training
        .par_iter()
        .enumerate()
        .map(|(q, set)| {
            let config = VnsConfig { seed: derive_seed(solver.seed, 1 + q as u64), ..solver.clone() };
            vns_solve(instance, set, &config).map(|out| (set.seed, out.best))
        })
        .collect::<Result<Vec<_>>>()?;
    assemble_report(solutions, training, eval_set, instance)
}

/// Full SAA run: sample `q` training sets and one evaluation set, solve, and
/// report bounds.
pub fn run_saa(instance: &Instance, config: &SaaConfig) -> Result<SaaReport> {
    config.validate()?;
    let training = (0..config.q)
        .into_par_iter()
        .map(|q| build_scenario_set(instance, config.m, config.training_seed(q), &config.scenario))
        .collect::<Result<Vec<_>>>()?;
    let eval_set = build_scenario_set(instance, config.m_eval, config.evaluation_seed(), &config.scenario)?;
    run_saa_with_sets(instance, &training, &eval_set, &config.solver)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::generate_instance;

    fn quick_solver() -> VnsConfig {
        VnsConfig { max_iters: 10, tabu_iters: 30, ..VnsConfig::default() }
    }

    #[test]
    fn gap_examples() {
        assert!((gap_p0_vs_p1(322.41, 309.43).unwrap() - 0.0402).abs() < 1e-4);
        assert!((gap_p0_vs_p1(315.42, 309.68).unwrap() - 0.0182).abs() < 1e-4);
        assert_eq!(gap_p0_vs_p1(250.0, 250.0).unwrap(), 0.0);
        assert!(matches!(gap_p0_vs_p1(0.0, 1.0), Err(Error::NonPositiveBaseline(_))));
        assert!(gap_p0_vs_p1(-5.0, 1.0).is_err());
    }

    #[test]
    fn variance_formulas() {
        assert_eq!(lb_variance(&[7.0]), 0.0);
        assert_eq!(lb_variance(&[3.0, 3.0, 3.0]), 0.0);
        // mean 2, deviations 1 + 0 + 1 = 2, / (3 * 2)
        assert!((lb_variance(&[1.0, 2.0, 3.0]) - 2.0 / 6.0).abs() < 1e-15);
        let big = [1e6 + 0.1, 1e6 + 0.2, 1e6 + 0.3];
        assert!((ub_variance(&big) - 0.02 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn config_validation() {
        let bad_q = SaaConfig { q: 0, ..SaaConfig::default() };
        let bad_m = SaaConfig { m: 0, ..SaaConfig::default() };
        let small_eval = SaaConfig { m: 30, m_eval: 10, ..SaaConfig::default() };
        for c in [bad_q, bad_m, small_eval] {
            assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        }
        SaaConfig::default().validate().unwrap();
    }

    #[test]
    fn self_evaluation_gap_is_zero() {
        let instance = generate_instance(6, 2);
        let set = build_scenario_set(&instance, 8, 5, &ScenarioConfig::default()).unwrap();
        let report = run_saa_with_sets(&instance, std::slice::from_ref(&set), &set, &quick_solver()).unwrap();
        assert_eq!(report.gap, 0.0);
        assert_eq!(report.lb_variance, 0.0);
        assert_eq!(report.gap_variance, report.ub_variance);
    }

    #[test]
    fn deterministic_scenarios_have_no_variance() {
        let instance = generate_instance(6, 3);
        let config = SaaConfig {
            q: 3,
            m: 4,
            m_eval: 10,
            seed: 1,
            scenario: ScenarioConfig::deterministic(),
            solver: quick_solver(),
        };
        let report = run_saa(&instance, &config).unwrap();
        assert_eq!(report.ub_variance, 0.0);
        assert_eq!(report.lb_variance, 0.0);
        assert_eq!(report.gap_variance, 0.0);
    }

    #[test]
    fn report_invariants_and_determinism() {
        let instance = generate_instance(7, 4);
        let config = SaaConfig { q: 3, m: 5, m_eval: 40, seed: 9, solver: quick_solver(), ..SaaConfig::default() };
        let report = run_saa(&instance, &config).unwrap();
        assert_eq!(report.replications.len(), 3);
        let min = report.replications.iter().map(|r| r.ub).fold(f64::INFINITY, f64::min);
        assert_eq!(report.ub, min);
        assert_eq!(report.gap, report.ub - report.lb_mean);
        assert_eq!(report.gap_variance, report.lb_variance + report.ub_variance);
        assert_eq!(report, run_saa(&instance, &config).unwrap());
        assert!(report.to_string().contains("gap"));
    }
}
