use super::model::{ClientId, CostBreakdown, Instance, NodeId, Route, ScenarioSet, Solution};
use super::schedule::{canonical_completion, canonical_into, scenario_penalties};
use super::validate::validate_solution;
use crate::{Error, Result};

/// Route-level cost oracle bound to an instance and a training scenario set.
///
/// Every route is costed under its canonical schedule for the bound scenario
/// set, so a route's cost depends only on its visit order. Solution cost is
/// separable over routes, which is what lets the search re-cost only the
/// routes a move touches.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    instance: &'a Instance,
    scenarios: &'a ScenarioSet,
    arc_cost: Vec<f64>,
    dim: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(instance: &'a Instance, scenarios: &'a ScenarioSet) -> Result<Self> {
        instance.validate()?;
        scenarios.check_dimension(instance)?;
        let dim = instance.client_count() + 1;
        let mut arc_cost = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                arc_cost[i * dim + j] = instance.params.travel_cost_factor * instance.distance(i, j)?;
            }
        }
        Ok(Self { instance, scenarios, arc_cost, dim })
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn scenarios(&self) -> &'a ScenarioSet {
        self.scenarios
    }

    /// Travel cost between physical nodes `0..=n`.
    #[inline]
    pub fn arc_cost(&self, i: NodeId, j: NodeId) -> f64 {
        self.arc_cost[i * self.dim + j]
    }

    pub fn route_travel(&self, visits: &[ClientId]) -> f64 {
        let Some((&first, _)) = visits.split_first() else {
            return 0.0;
        };
        let inner: f64 = visits.windows(2).map(|w| self.arc_cost(w[0], w[1])).sum();
        self.arc_cost(0, first) + inner + self.arc_cost(visits[visits.len() - 1], 0)
    }

    pub fn canonical(&self, visits: &[ClientId]) -> Vec<f64> {
        let mut out = Vec::with_capacity(visits.len());
        canonical_into(visits, self.scenarios, &mut out);
        out
    }

    /// Worst-case return time over the bound scenarios under the canonical schedule.
    pub fn completion(&self, visits: &[ClientId]) -> f64 {
        let schedule = self.canonical(visits);
        canonical_completion(visits, &schedule, self.scenarios)
    }

    /// Cost of one route under its canonical schedule; zero for an empty route.
    pub fn route_cost(&self, visits: &[ClientId]) -> CostBreakdown {
        if visits.is_empty() {
            return CostBreakdown::default();
        }
        let schedule = self.canonical(visits);
        let params = &self.instance.params;
        let (mut wait, mut over) = (0.0, 0.0);
        for scenario in self.scenarios.iter() {
            let (w, o) = scenario_penalties(visits, &schedule, scenario, params);
            wait += w;
            over += o;
        }
        let m = self.scenarios.len() as f64;
        CostBreakdown::new(params.c_fixed, self.route_travel(visits), wait / m, over / m)
    }
}

/// One visit sequence per caregiver with cached route costs.
///
/// Schedules are implicit: every route is understood to use its canonical
/// schedule with respect to the evaluator's scenario set.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    routes: Vec<Vec<ClientId>>,
    costs: Vec<CostBreakdown>,
}

impl Plan {
    pub fn new(eval: &Evaluator<'_>, routes: Vec<Vec<ClientId>>) -> Self {
        let costs = routes.iter().map(|r| eval.route_cost(r)).collect();
        Self { routes, costs }
    }

    /// Routes ordered by caregiver; the schedule in `solution` is ignored.
    pub fn from_solution(eval: &Evaluator<'_>, solution: &Solution) -> Result<Self> {
        let mut routes = vec![Vec::new(); eval.instance().caregiver_count];
        let violations: Vec<_> = validate_solution(solution, eval.instance())
            .into_iter()
            .filter(|v| !matches!(v, super::Violation::MissingSchedule(_) | super::Violation::NegativeSchedule(_)))
            .collect();
        if !violations.is_empty() {
            return Err(Error::InvalidSolution(violations));
        }
        for route in &solution.routes {
            routes[route.caregiver - 1] = route.visits.clone();
        }
        Ok(Self::new(eval, routes))
    }

    pub fn routes(&self) -> &[Vec<ClientId>] {
        &self.routes
    }

    pub fn route(&self, index: usize) -> &[ClientId] {
        &self.routes[index]
    }

    pub fn route_costs(&self) -> &[CostBreakdown] {
        &self.costs
    }

    pub fn total(&self) -> f64 {
        self.costs.iter().map(|c| c.total).sum()
    }

    pub fn breakdown(&self) -> CostBreakdown {
        self.costs.iter().copied().sum()
    }

    pub fn client_count(&self) -> usize {
        self.routes.iter().map(Vec::len).sum()
    }

    pub fn non_empty_routes(&self) -> usize {
        self.routes.iter().filter(|r| !r.is_empty()).count()
    }

    /// `(route index, position)` of a client.
    pub fn locate(&self, client: ClientId) -> Option<(usize, usize)> {
        self.routes
            .iter()
            .enumerate()
            .find_map(|(k, r)| r.iter().position(|&c| c == client).map(|p| (k, p)))
    }

    pub fn set_route(&mut self, eval: &Evaluator<'_>, index: usize, visits: Vec<ClientId>) {
        self.costs[index] = eval.route_cost(&visits);
        self.routes[index] = visits;
    }

    pub(crate) fn set_route_costed(&mut self, index: usize, visits: Vec<ClientId>, cost: CostBreakdown) {
        self.routes[index] = visits;
        self.costs[index] = cost;
    }

    /// Materialize routes and canonical schedules as a [`Solution`].
    pub fn to_solution(&self, eval: &Evaluator<'_>) -> Solution {
        let mut solution = Solution::empty(0);
        for (k, visits) in self.routes.iter().enumerate() {
            let schedule = eval.canonical(visits);
            solution.schedule.extend(visits.iter().copied().zip(schedule));
            solution.routes.push(Route::new(k + 1, visits.clone()));
        }
        solution
    }
}
