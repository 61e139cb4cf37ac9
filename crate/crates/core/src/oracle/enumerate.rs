use itertools::Itertools;
use rayon::prelude::*;

use crate::domain::{ClientId, Evaluator, Instance, Plan, ScenarioSet, Solution};
use crate::{Error, Result};

/// Largest client count accepted by [`enumerate_optimal`].
pub const ORACLE_CLIENT_LIMIT: usize = 8;

/// Cheapest visit order of every client subset, indexed by bitmask.
fn best_orders(eval: &Evaluator<'_>, n: usize) -> Vec<(f64, Vec<ClientId>)> {
    (0..1usize << n)
        .into_par_iter()
        .map(|mask| {
            if mask == 0 {
                return (0.0, Vec::new());
            }
            let members: Vec<ClientId> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
            let mut best = (f64::INFINITY, Vec::new());
            // Lexicographic order; strict comparison keeps the first optimum.
            for order in members.iter().copied().permutations(members.len()) {
                let cost = eval.route_cost(&order).total;
                if cost < best.0 {
                    best = (cost, order);
                }
            }
            best
        })
        .collect()
}

/// Exact optimum by enumerating every partition of the clients into at most
/// `K` routes and every visit order, each route scheduled canonically.
///
/// Ties between partitions keep the first found; the search considers fewer
/// routes first and, within a count, submasks in increasing order.
pub fn enumerate_optimal(instance: &Instance, scenarios: &ScenarioSet) -> Result<(Solution, f64)> {
    let n = instance.client_count();
    if n > ORACLE_CLIENT_LIMIT {
        return Err(Error::OracleTooLarge { clients: n, limit: ORACLE_CLIENT_LIMIT });
    }
    let eval = Evaluator::new(instance, scenarios)?;
    let orders = best_orders(&eval, n);
    let full = (1usize << n) - 1;
    let k_max = instance.caregiver_count.min(n);

    // cost[r][mask]: cheapest cover of `mask` by exactly r routes; choice holds
    // the route containing the lowest client of `mask`.
    let mut cost = vec![vec![f64::INFINITY; full + 1]; k_max + 1];
    let mut choice = vec![vec![0usize; full + 1]; k_max + 1];
    cost[0][0] = 0.0;
    for r in 1..=k_max {
        for mask in 1..=full {
            let low = mask & mask.wrapping_neg();
            let rest = mask ^ low;
            // Enumerate subsets of `rest` in increasing order, each joined with `low`.
            let mut sub = 0usize;
            loop {
                let route = sub | low;
                let prev = cost[r - 1][mask ^ route];
                if prev.is_finite() {
                    let c = orders[route].0 + prev;
                    if c < cost[r][mask] {
                        cost[r][mask] = c;
                        choice[r][mask] = route;
                    }
                }
                if sub == rest {
                    break;
                }
                sub = (sub.wrapping_sub(rest)) & rest;
            }
        }
    }

    let (mut r, _) = (1..=k_max).fold((0, f64::INFINITY), |(br, bc), r| {
        if cost[r][full] < bc {
            (r, cost[r][full])
        } else {
            (br, bc)
        }
    });
    let mut routes = Vec::with_capacity(instance.caregiver_count);
    let mut mask = full;
    while mask != 0 {
        let route = choice[r][mask];
        routes.push(orders[route].1.clone());
        mask ^= route;
        r -= 1;
    }
    routes.sort_by_key(|v| v.iter().copied().min());
    routes.resize(instance.caregiver_count, Vec::new());
    let plan = Plan::new(&eval, routes);
    let total = plan.total();
    Ok((plan.to_solution(&eval), total))
}
