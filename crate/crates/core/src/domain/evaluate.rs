use super::model::{CostBreakdown, Instance, NodeId, Scenario, ScenarioSet, Solution};
use super::schedule::scenario_penalties;
use super::validate::validate_solution;
use crate::{Error, Result};

/// Money spent travelling between two nodes: scaled Euclidean distance.
pub fn travel_cost(instance: &Instance, i: NodeId, j: NodeId) -> Result<f64> {
    Ok(instance.params.travel_cost_factor * instance.distance(i, j)?)
}

/// Sample-average cost breakdown plus the total cost realized in each scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioCosts {
    pub breakdown: CostBreakdown,
    /// `fixed + travel + penalties` for each scenario, in set order.
    pub per_scenario: Vec<f64>,
}

/// Cost of a solution with its schedule held fixed, averaged over `scenarios`.
///
/// This is the objective of the sampled model when `scenarios` is the training
/// set, and the out-of-sample estimator when it is an independent set.
pub fn evaluate_per_scenario(solution: &Solution, instance: &Instance, scenarios: &ScenarioSet) -> Result<ScenarioCosts> {
    let violations = validate_solution(solution, instance);
    if !violations.is_empty() {
        return Err(Error::InvalidSolution(violations));
    }
    scenarios.check_dimension(instance)?;

    let params = &instance.params;
    let mut fixed = 0.0;
    let mut travel = 0.0;
    let mut aligned = Vec::with_capacity(solution.routes.len());
    for route in solution.routes.iter().filter(|r| !r.is_empty()) {
        fixed += params.c_fixed;
        let mut prev = 0;
        for &c in &route.visits {
            travel += travel_cost(instance, prev, c)?;
            prev = c;
        }
        travel += travel_cost(instance, prev, 0)?;
        let times: Vec<f64> = route.visits.iter().map(|c| solution.schedule[c]).collect();
        aligned.push((route.visits.as_slice(), times));
    }

    let (wait_sum, over_sum, per_scenario) = penalties_by_scenario(&aligned, scenarios.iter(), instance, fixed + travel);
    let m = scenarios.len() as f64;
    Ok(ScenarioCosts {
        breakdown: CostBreakdown::new(fixed, travel, wait_sum / m, over_sum / m),
        per_scenario,
    })
}

fn penalties_by_scenario<'a>(
    aligned: &[(&[usize], Vec<f64>)],
    scenarios: impl Iterator<Item = &'a Scenario>,
    instance: &Instance,
    base: f64,
) -> (f64, f64, Vec<f64>) {
    let mut wait_sum = 0.0;
    let mut over_sum = 0.0;
    let mut per_scenario = Vec::new();
    for scenario in scenarios {
        let mut wait = 0.0;
        let mut over = 0.0;
        for (visits, times) in aligned {
            let (w, o) = scenario_penalties(visits, times, scenario, &instance.params);
            wait += w;
            over += o;
        }
        wait_sum += wait;
        over_sum += over;
        per_scenario.push(base + wait + over);
    }
    (wait_sum, over_sum, per_scenario)
}

/// Sample-average cost of a solution over a scenario set.
pub fn evaluate(solution: &Solution, instance: &Instance, scenarios: &ScenarioSet) -> Result<CostBreakdown> {
    evaluate_per_scenario(solution, instance, scenarios).map(|c| c.breakdown)
}

/// Cost under a single (typically mean) scenario.
pub fn evaluate_deterministic(solution: &Solution, instance: &Instance, mean_scenario: &Scenario) -> Result<CostBreakdown> {
    let set = ScenarioSet::single(mean_scenario.clone())?;
    evaluate(solution, instance, &set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{canonical_schedule, Client, CostParams, Route};

    fn one_client() -> (Instance, ScenarioSet) {
        let instance = Instance::new([0.0, 0.0], vec![Client { id: 1, x: 0.0, y: 10.0 }], 1, CostParams::default()).unwrap();
        let scenario = Scenario { travel_time: vec![vec![0.0, 10.0], vec![10.0, 0.0]], service_time: vec![0.0, 30.0] };
        (instance, ScenarioSet::single(scenario).unwrap())
    }

    #[test]
    fn travel_cost_examples() {
        let (instance, _) = one_client();
        assert_eq!(travel_cost(&instance, 0, 1).unwrap(), 5.0);
        assert_eq!(travel_cost(&instance, 1, 0).unwrap(), 5.0);
        assert_eq!(travel_cost(&instance, 1, 1).unwrap(), 0.0);
        assert_eq!(travel_cost(&instance, 0, 2).unwrap(), 0.0);
        assert!(matches!(travel_cost(&instance, 0, 3), Err(Error::UnknownNode { node: 3, .. })));
    }

    #[test]
    fn single_client_hand_evaluation() {
        let (instance, set) = one_client();
        let mut solution = Solution::empty(1);
        solution.routes[0] = Route::new(1, vec![1]);
        solution.schedule.insert(1, canonical_schedule(&[1], &set)[0]);
        let cost = evaluate(&solution, &instance, &set).unwrap();
        assert_eq!(cost, CostBreakdown::new(100.0, 10.0, 0.0, 0.0));
        assert_eq!(cost.total, 110.0);
        let det = evaluate_deterministic(&solution, &instance, &set.scenarios[0]).unwrap();
        assert_eq!(det, cost);
    }

    #[test]
    fn invalid_solution_is_rejected() {
        let (instance, set) = one_client();
        let solution = Solution::empty(1);
        assert!(matches!(evaluate(&solution, &instance, &set), Err(Error::InvalidSolution(_))));
    }

    #[test]
    fn zero_penalty_rates_leave_fixed_plus_travel() {
        let (mut instance, set) = one_client();
        instance.params.c_wait = 0.0;
        instance.params.c_overtime = 0.0;
        let mut solution = Solution::empty(1);
        solution.routes[0] = Route::new(1, vec![1]);
        solution.schedule.insert(1, 500.0);
        let cost = evaluate(&solution, &instance, &set).unwrap();
        assert_eq!(cost.total, cost.fixed + cost.travel);
    }
}
