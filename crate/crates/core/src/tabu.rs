//! Tabu search alternating 2-opt and cross-route swap moves.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{ClientId, CostBreakdown, Evaluator, NodeId, Plan, Solution};
use crate::{Error, Result, IMPROVEMENT_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TabuConfig {
    /// Iteration cap.
    pub max_iters: usize,
    /// Consecutive non-improving iterations tolerated.
    pub no_improve_cap: usize,
    pub tenure_min: usize,
    pub tenure_max: usize,
}

impl TabuConfig {
    /// Standard settings for an instance with `n` clients.
    pub fn for_clients(n: usize) -> Self {
        TabuConfig { max_iters: 1000, no_improve_cap: 5 * n, tenure_min: 5, tenure_max: 10 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tenure_min > self.tenure_max {
            return Err(Error::InvalidConfig(format!(
                "tenure bounds reversed: {} > {}",
                self.tenure_min, self.tenure_max
            )));
        }
        Ok(())
    }
}

/// Undirected edge between two nodes, smaller id first. The depot is node 0
/// at both ends of a route.
pub type Edge = (NodeId, NodeId);

fn edge(a: NodeId, b: NodeId) -> Edge {
    (a.min(b), a.max(b))
}

fn route_edges(visits: &[ClientId]) -> Vec<Edge> {
    if visits.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(visits.len() + 1);
    let mut prev = 0;
    for &v in visits {
        out.push(edge(prev, v));
        prev = v;
    }
    out.push(edge(prev, 0));
    out
}

/// Forbidden edges with the iteration at which each stops being tabu.
#[derive(Debug, Clone, PartialEq)]
pub struct TabuList {
    dim: usize,
    expiry: Vec<usize>,
    tenure_min: usize,
    tenure_max: usize,
}

impl TabuList {
    pub fn new(client_count: usize, tenure_min: usize, tenure_max: usize) -> Self {
        let dim = client_count + 1;
        TabuList { dim, expiry: vec![0; dim * dim], tenure_min, tenure_max }
    }

    fn slot(&self, (a, b): Edge) -> usize {
        a * self.dim + b
    }

    /// Tabu during iterations strictly before the recorded expiry.
    pub fn is_tabu(&self, e: Edge, iter: usize) -> bool {
        self.expiry[self.slot(edge(e.0, e.1))] > iter
    }

    pub fn expiry(&self, e: Edge) -> usize {
        self.expiry[self.slot(edge(e.0, e.1))]
    }

    /// Forbid `e` for the next `tenure` iterations after `iter`.
    pub fn forbid(&mut self, e: Edge, iter: usize, tenure: usize) {
        let slot = self.slot(edge(e.0, e.1));
        self.expiry[slot] = iter + tenure + 1;
    }

    /// Forbid `e` with a tenure drawn uniformly from the configured bounds.
    pub fn forbid_random<R: Rng>(&mut self, e: Edge, iter: usize, rng: &mut R) -> usize {
        let tenure = rng.random_range(self.tenure_min..=self.tenure_max);
        self.forbid(e, iter, tenure);
        tenure
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    /// Reverse `route[i..=j]`.
    TwoOpt { route: usize, i: usize, j: usize },
    /// Exchange `routes[a][pa]` and `routes[b][pb]`, `a < b`.
    Swap { a: usize, pa: usize, b: usize, pb: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub mv: Move,
    /// Modified routes with their new visits and costs.
    pub changes: Vec<(usize, Vec<ClientId>, CostBreakdown)>,
    /// Plan total after the move.
    pub cost: f64,
    pub removed_edges: Vec<Edge>,
    pub added_edges: Vec<Edge>,
    /// Whether an added edge is currently tabu.
    pub tabu: bool,
}

impl Candidate {
    /// Admissible when not tabu, or when it beats the best cost seen so far.
    pub fn admissible(&self, best: f64) -> bool {
        !self.tabu || self.cost < best - IMPROVEMENT_EPS
    }

    pub fn apply(&self, plan: &mut Plan) {
        for (k, visits, cost) in &self.changes {
            plan.set_route_costed(*k, visits.clone(), *cost);
        }
    }
}

struct Context<'p, 'e, 'a> {
    plan: &'p Plan,
    tabu: &'p TabuList,
    iter: usize,
    eval: &'e Evaluator<'a>,
}

impl Context<'_, '_, '_> {
    fn candidate(&self, mv: Move, changes: Vec<(usize, Vec<ClientId>)>) -> Candidate {
        let mut old_edges = Vec::new();
        let mut new_edges = Vec::new();
        let changes: Vec<(usize, Vec<ClientId>, CostBreakdown)> = changes
            .into_iter()
            .map(|(k, visits)| {
                old_edges.extend(route_edges(self.plan.route(k)));
                new_edges.extend(route_edges(&visits));
                let cost = self.eval.route_cost(&visits);
                (k, visits, cost)
            })
            .collect();
        let cost = self
            .plan
            .route_costs()
            .iter()
            .enumerate()
            .map(|(k, c)| changes.iter().find(|(ck, _, _)| *ck == k).map_or(c.total, |(_, _, nc)| nc.total))
            .sum();
        let mut removed_edges: Vec<Edge> = old_edges.iter().copied().filter(|e| !new_edges.contains(e)).collect();
        let mut added_edges: Vec<Edge> = new_edges.iter().copied().filter(|e| !old_edges.contains(e)).collect();
        removed_edges.sort_unstable();
        removed_edges.dedup();
        added_edges.sort_unstable();
        added_edges.dedup();
        let tabu = added_edges.iter().any(|&e| self.tabu.is_tabu(e, self.iter));
        Candidate { mv, changes, cost, removed_edges, added_edges, tabu }
    }
}

/// Every segment reversal `i < j` of every route, tabu status evaluated at `iter`.
pub fn two_opt_moves(plan: &Plan, tabu: &TabuList, iter: usize, eval: &Evaluator<'_>) -> Vec<Candidate> {
    let ctx = Context { plan, tabu, iter, eval };
    let mut out = Vec::new();
    for (k, route) in plan.routes().iter().enumerate() {
        for i in 0..route.len() {
            for j in i + 1..route.len() {
                let mut visits = route.clone();
                visits[i..=j].reverse();
                out.push(ctx.candidate(Move::TwoOpt { route: k, i, j }, vec![(k, visits)]));
            }
        }
    }
    out
}

/// Every exchange of two clients on different routes.
pub fn swap_moves(plan: &Plan, tabu: &TabuList, iter: usize, eval: &Evaluator<'_>) -> Vec<Candidate> {
    let ctx = Context { plan, tabu, iter, eval };
    let routes = plan.routes();
    let mut out = Vec::new();
    for a in 0..routes.len() {
        for b in a + 1..routes.len() {
            for pa in 0..routes[a].len() {
                for pb in 0..routes[b].len() {
                    let mut ra = routes[a].clone();
                    let mut rb = routes[b].clone();
                    std::mem::swap(&mut ra[pa], &mut rb[pb]);
                    out.push(ctx.candidate(Move::Swap { a, pa, b, pb }, vec![(a, ra), (b, rb)]));
                }
            }
        }
    }
    out
}

/// Cheapest admissible candidate; ties keep the first in enumeration order.
pub fn select_best(candidates: &[Candidate], best: f64) -> Option<&Candidate> {
    candidates
        .iter()
        .filter(|c| c.admissible(best))
        .fold(None, |acc: Option<&Candidate>, c| match acc {
            Some(a) if a.cost <= c.cost => Some(a),
            _ => Some(c),
        })
}

/// Odd iterations explore 2-opt, even iterations swaps.
pub fn moves_for_iteration(plan: &Plan, tabu: &TabuList, iter: usize, eval: &Evaluator<'_>) -> Vec<Candidate> {
    if iter % 2 == 1 {
        two_opt_moves(plan, tabu, iter, eval)
    } else {
        swap_moves(plan, tabu, iter, eval)
    }
}

/// Run tabu search from `start`, returning the final current plan and the
/// best plan seen.
///
/// The search always moves to the best admissible candidate, even when it is
/// worse. It stops after `max_iters` iterations or once more than
/// `no_improve_cap` consecutive iterations fail to improve the best.
pub fn tabu_search<R: Rng>(start: &Plan, config: &TabuConfig, rng: &mut R, eval: &Evaluator<'_>) -> (Plan, Plan) {
    let mut tabu = TabuList::new(eval.instance().client_count(), config.tenure_min, config.tenure_max);
    let mut current = start.clone();
    let mut best = start.clone();
    let mut best_cost = best.total();
    let mut stop = 0;
    let mut iter = 1;
    while iter <= config.max_iters && stop <= config.no_improve_cap {
        let candidates = moves_for_iteration(&current, &tabu, iter, eval);
        match select_best(&candidates, best_cost) {
            Some(chosen) => {
                chosen.apply(&mut current);
                for &e in &chosen.removed_edges {
                    tabu.forbid_random(e, iter, rng);
                }
                if chosen.cost < best_cost - IMPROVEMENT_EPS {
                    best = current.clone();
                    best_cost = best.total();
                    stop = 0;
                } else {
                    stop += 1;
                }
            }
            None => stop += 1,
        }
        iter += 1;
    }
    (current, best)
}

/// [`tabu_search`] on full solutions. Schedules are re-derived canonically.
pub fn tabu_search_solution<R: Rng>(
    start: &Solution,
    config: &TabuConfig,
    rng: &mut R,
    eval: &Evaluator<'_>,
) -> Result<(Solution, Solution)> {
    config.validate()?;
    let plan = Plan::from_solution(eval, start)?;
    let (last, best) = tabu_search(&plan, config, rng, eval);
    Ok((last.to_solution(eval), best.to_solution(eval)))
}
