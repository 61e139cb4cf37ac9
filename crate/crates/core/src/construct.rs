//! Clarke-Wright savings construction.
//!
//! Starts from one route per client and greedily concatenates pairs of routes
//! end to end, never reordering the visits inside either route.

use std::collections::BTreeMap;

use crate::domain::{ClientId, Evaluator, Instance, Plan, Route, ScenarioSet, Solution};
use crate::{Error, Result, IMPROVEMENT_EPS};

/// One singleton route per client, in client order, with provisional caregiver
/// slots `1..=n` (these may exceed the real caregiver count).
pub fn initial_routes(instance: &Instance) -> Vec<Route> {
    instance.client_ids().map(|c| Route::new(c, vec![c])).collect()
}

/// Cost of a route under its canonical schedule: fixed, travel and the
/// sample-average penalties. Zero for an empty route.
pub fn route_cost(route: &Route, instance: &Instance, scenarios: &ScenarioSet) -> Result<f64> {
    let eval = Evaluator::new(instance, scenarios)?;
    Ok(eval.route_cost(&route.visits).total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Savings {
    pub value: f64,
    pub merged: Route,
}

/// Saving of concatenating `p` and `q`, taking the better of `p + q` and `q + p`.
pub fn savings(p: &Route, q: &Route, instance: &Instance, scenarios: &ScenarioSet) -> Result<Savings> {
    if let Some(&shared) = p.visits.iter().find(|c| q.visits.contains(c)) {
        return Err(Error::OverlappingRoutes(shared));
    }
    let eval = Evaluator::new(instance, scenarios)?;
    let merge = best_concatenation(&eval, &p.visits, eval.route_cost(&p.visits).total, &q.visits, eval.route_cost(&q.visits).total);
    Ok(Savings { value: merge.saving, merged: Route::new(p.caregiver, merge.visits) })
}

#[derive(Debug, Clone)]
struct Merge {
    saving: f64,
    merged_cost: crate::domain::CostBreakdown,
    visits: Vec<ClientId>,
}

fn best_concatenation(eval: &Evaluator<'_>, p: &[ClientId], p_cost: f64, q: &[ClientId], q_cost: f64) -> Merge {
    let pq: Vec<ClientId> = p.iter().chain(q).copied().collect();
    let qp: Vec<ClientId> = q.iter().chain(p).copied().collect();
    let c_pq = eval.route_cost(&pq);
    let c_qp = eval.route_cost(&qp);
    let (visits, merged_cost) = if c_qp.total < c_pq.total { (qp, c_qp) } else { (pq, c_pq) };
    Merge { saving: p_cost + q_cost - merged_cost.total, merged_cost, visits }
}

/// Initial solution with canonical schedules.
pub fn build_initial(instance: &Instance, scenarios: &ScenarioSet) -> Result<Solution> {
    let eval = Evaluator::new(instance, scenarios)?;
    Ok(build_initial_plan(&eval).to_solution(&eval))
}

struct Live {
    visits: Vec<ClientId>,
    cost: crate::domain::CostBreakdown,
    min_client: ClientId,
}

/// Savings merging on route-level costs.
///
/// A merge is accepted only when its saving is positive and the merged route's
/// worst-case return time is within the shift; otherwise the next best saving
/// is tried. When no such merge remains but more routes than caregivers are
/// left, the best remaining merges are forced regardless of sign or duration.
pub fn build_initial_plan(eval: &Evaluator<'_>) -> Plan {
    let instance = eval.instance();
    let mut live: BTreeMap<usize, Live> = BTreeMap::new();
    for c in instance.client_ids() {
        let visits = vec![c];
        let cost = eval.route_cost(&visits);
        live.insert(c, Live { visits, cost, min_client: c });
    }
    let mut next_id = instance.client_count() + 1;
    let mut pairs: BTreeMap<(usize, usize), Merge> = BTreeMap::new();
    let shift = instance.params.shift_length;
    let mut forced = false;

    loop {
        if live.len() <= 1 || (forced && live.len() <= instance.caregiver_count) {
            break;
        }
        let ids: Vec<usize> = live.keys().copied().collect();
        for (a_pos, &a) in ids.iter().enumerate() {
            for &b in &ids[a_pos + 1..] {
                pairs.entry((a, b)).or_insert_with(|| {
                    let (ra, rb) = (&live[&a], &live[&b]);
                    best_concatenation(eval, &ra.visits, ra.cost.total, &rb.visits, rb.cost.total)
                });
            }
        }
        let mut ranked: Vec<(&(usize, usize), &Merge)> = pairs.iter().collect();
        ranked.sort_by(|(ka, ma), (kb, mb)| {
            mb.saving
                .total_cmp(&ma.saving)
                .then_with(|| pair_key(&live, **ka).cmp(&pair_key(&live, **kb)))
        });

        let chosen = if forced {
            ranked.first().map(|(k, _)| **k)
        } else {
            ranked
                .iter()
                .take_while(|(_, m)| m.saving > IMPROVEMENT_EPS)
                .find(|(_, m)| eval.completion(&m.visits) <= shift + IMPROVEMENT_EPS)
                .map(|(k, _)| **k)
        };

        match chosen {
            Some((a, b)) => {
                let merge = pairs.remove(&(a, b)).expect("ranked pair exists");
                pairs.retain(|&(x, y), _| x != a && x != b && y != a && y != b);
                let min_client = live[&a].min_client.min(live[&b].min_client);
                live.remove(&a);
                live.remove(&b);
                live.insert(next_id, Live { visits: merge.visits, cost: merge.merged_cost, min_client });
                next_id += 1;
            }
            None if !forced && live.len() > instance.caregiver_count => forced = true,
            None => break,
        }
    }

    let mut routes: Vec<Live> = live.into_values().collect();
    routes.sort_by_key(|r| r.min_client);
    let mut visits: Vec<Vec<ClientId>> = routes.into_iter().map(|r| r.visits).collect();
    visits.resize(instance.caregiver_count.max(visits.len()), Vec::new());
    Plan::new(eval, visits)
}

fn pair_key(live: &BTreeMap<usize, Live>, (a, b): (usize, usize)) -> (ClientId, ClientId) {
    let (x, y) = (live[&a].min_client, live[&b].min_client);
    (x.min(y), x.max(y))
}
