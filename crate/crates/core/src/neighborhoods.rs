//! Shake operators: three removal strategies followed by regret-2 reinsertion.

use std::fmt;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{ClientId, CostBreakdown, Evaluator, Instance, Plan};
use crate::{Error, Result};

/// The removal strategy used by a shake.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Neighborhood {
    /// N1: uniformly random clients.
    Random,
    /// N2: clients whose removal saves the most.
    Relocation,
    /// N3: clients of the routes whose bounding boxes overlap most.
    Overlap,
}

impl Neighborhood {
    pub const ALL: [Neighborhood; 3] = [Neighborhood::Random, Neighborhood::Relocation, Neighborhood::Overlap];
}

impl fmt::Display for Neighborhood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Neighborhood::Random => "N1",
            Neighborhood::Relocation => "N2",
            Neighborhood::Overlap => "N3",
        })
    }
}

/// A plan with some clients detached from every route.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSolution {
    pub plan: Plan,
    /// Detached clients, ascending.
    pub removed: Vec<ClientId>,
}

/// `ceil(r * n)`, at least one and at most `n`.
pub fn removal_count(n: usize, r: f64) -> Result<usize> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidConfig(format!("removal fraction must lie in (0, 1], got {r}")));
    }
    // Guard against 0.2 * 10 landing a hair above 2.
    let k = (r * n as f64 - 1e-9).ceil() as usize;
    Ok(k.clamp(1, n.max(1)))
}

/// Detach `clients` and re-cost the routes they came from.
pub fn detach(plan: &Plan, clients: &[ClientId], eval: &Evaluator<'_>) -> PartialSolution {
    let mut out = plan.clone();
    for (k, route) in plan.routes().iter().enumerate() {
        if route.iter().any(|c| clients.contains(c)) {
            let kept: Vec<ClientId> = route.iter().copied().filter(|c| !clients.contains(c)).collect();
            out.set_route(eval, k, kept);
        }
    }
    let mut removed = clients.to_vec();
    removed.sort_unstable();
    PartialSolution { plan: out, removed }
}

fn routed_clients(plan: &Plan) -> Vec<ClientId> {
    let mut all: Vec<ClientId> = plan.routes().iter().flatten().copied().collect();
    all.sort_unstable();
    all
}

/// N1: remove `ceil(r * n)` clients chosen uniformly at random.
pub fn remove_random<R: Rng>(plan: &Plan, r: f64, rng: &mut R, eval: &Evaluator<'_>) -> Result<PartialSolution> {
    let clients = routed_clients(plan);
    let k = removal_count(clients.len(), r)?;
    let chosen: Vec<ClientId> = sample(rng, clients.len(), k).into_iter().map(|i| clients[i]).collect();
    Ok(detach(plan, &chosen, eval))
}

/// Total cost saved by splicing `client` out of its route (the route keeps
/// its order and is re-scheduled canonically). May be negative.
pub fn relocation_cost(plan: &Plan, client: ClientId, eval: &Evaluator<'_>) -> Result<f64> {
    let (k, pos) = plan.locate(client).ok_or(Error::UnroutedClient(client))?;
    let mut shorter = plan.route(k).to_vec();
    shorter.remove(pos);
    Ok(plan.route_costs()[k].total - eval.route_cost(&shorter).total)
}

/// N2: remove the `ceil(r * n)` clients with the largest relocation cost,
/// all measured against the starting plan. Ties go to the lower client id.
pub fn remove_max_relocation(plan: &Plan, r: f64, eval: &Evaluator<'_>) -> Result<PartialSolution> {
    let clients = routed_clients(plan);
    let k = removal_count(clients.len(), r)?;
    let mut scored = clients
        .iter()
        .map(|&c| relocation_cost(plan, c, eval).map(|cost| (c, cost)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let chosen: Vec<ClientId> = scored.iter().take(k).map(|&(c, _)| c).collect();
    Ok(detach(plan, &chosen, eval))
}

/// Axis-aligned rectangle in instance coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BBox {
    /// Smallest rectangle covering the depot and every client of the route.
    pub fn of_route(route: &[ClientId], instance: &Instance) -> Option<BBox> {
        if route.is_empty() {
            return None;
        }
        let [dx, dy] = instance.depot;
        let mut b = BBox { min_x: dx, min_y: dy, max_x: dx, max_y: dy };
        for &c in route {
            let client = &instance.clients[c - 1];
            b.min_x = b.min_x.min(client.x);
            b.min_y = b.min_y.min(client.y);
            b.max_x = b.max_x.max(client.x);
            b.max_y = b.max_y.max(client.y);
        }
        Some(b)
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = self.max_x.min(other.max_x) - self.min_x.max(other.min_x);
        let h = self.max_y.min(other.max_y) - self.min_y.max(other.min_y);
        w.max(0.0) * h.max(0.0)
    }
}

/// Sum of the intersection areas between route `index`'s box and the boxes of
/// every other non-empty route.
pub fn overlap_area(plan: &Plan, index: usize, instance: &Instance) -> f64 {
    let boxes: Vec<Option<BBox>> = plan.routes().iter().map(|r| BBox::of_route(r, instance)).collect();
    overlap_from_boxes(&boxes, index)
}

fn overlap_from_boxes(boxes: &[Option<BBox>], index: usize) -> f64 {
    let Some(own) = boxes[index] else {
        return 0.0;
    };
    boxes
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != index)
        .filter_map(|(_, b)| b.as_ref())
        .map(|b| own.intersection_area(b))
        .sum()
}

/// N3: remove `ceil(r * n)` clients drawn uniformly from the route with the
/// largest overlap area, spilling into the next-ranked routes when it is too
/// short. With fewer than two non-empty routes this is N1.
pub fn remove_overlap<R: Rng>(plan: &Plan, r: f64, rng: &mut R, eval: &Evaluator<'_>) -> Result<PartialSolution> {
    if plan.non_empty_routes() < 2 {
        return remove_random(plan, r, rng, eval);
    }
    let mut k = removal_count(plan.client_count(), r)?;
    let boxes: Vec<Option<BBox>> = plan.routes().iter().map(|route| BBox::of_route(route, eval.instance())).collect();
    let mut ranked: Vec<(usize, f64)> = (0..boxes.len())
        .filter(|&i| boxes[i].is_some())
        .map(|i| (i, overlap_from_boxes(&boxes, i)))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut chosen = Vec::with_capacity(k);
    for (route_index, _) in ranked {
        if k == 0 {
            break;
        }
        let route = plan.route(route_index);
        let take = k.min(route.len());
        chosen.extend(sample(rng, route.len(), take).into_iter().map(|i| route[i]));
        k -= take;
    }
    Ok(detach(plan, &chosen, eval))
}

/// One way of inserting a client: the route, the position within it, and the
/// resulting change in total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Insertion {
    pub route: usize,
    pub position: usize,
    pub delta: f64,
    /// Cost of the modified route.
    pub route_cost: CostBreakdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsertionOptions {
    pub best: Insertion,
    /// Second smallest delta over distinct positions; `+inf` when only one
    /// position exists.
    pub second_delta: f64,
}

impl InsertionOptions {
    pub fn regret(&self) -> f64 {
        self.second_delta - self.best.delta
    }
}

/// Cheapest and second cheapest insertion of `client` into the partial plan.
///
/// Every position of every non-empty route is a candidate. Unused caregivers
/// contribute a single extra candidate, opening the first empty route.
pub fn best_insertion(partial: &PartialSolution, client: ClientId, eval: &Evaluator<'_>) -> InsertionOptions {
    let plan = &partial.plan;
    let mut best: Option<Insertion> = None;
    let mut second = f64::INFINITY;
    let mut opened_empty = false;
    let mut buffer = Vec::new();

    for (k, route) in plan.routes().iter().enumerate() {
        if route.is_empty() {
            if opened_empty {
                continue;
            }
            opened_empty = true;
        }
        let before = plan.route_costs()[k].total;
        for position in 0..=route.len() {
            buffer.clear();
            buffer.extend_from_slice(&route[..position]);
            buffer.push(client);
            buffer.extend_from_slice(&route[position..]);
            let cost = eval.route_cost(&buffer);
            let delta = cost.total - before;
            match &best {
                Some(b) if delta >= b.delta => second = second.min(delta),
                _ => {
                    if let Some(b) = &best {
                        second = second.min(b.delta);
                    }
                    best = Some(Insertion { route: k, position, delta, route_cost: cost });
                }
            }
        }
    }
    InsertionOptions { best: best.expect("a plan always has at least one route"), second_delta: second }
}

/// Reinsert every detached client, always the one with the largest regret
/// first. Ties prefer the smaller best delta, then the lower client id.
pub fn regret_insert(partial: PartialSolution, eval: &Evaluator<'_>) -> Plan {
    let PartialSolution { mut plan, mut removed } = partial;
    while !removed.is_empty() {
        let view = PartialSolution { plan, removed: Vec::new() };
        let (slot, options) = removed
            .iter()
            .enumerate()
            .map(|(slot, &c)| (slot, best_insertion(&view, c, eval)))
            .min_by(|(sa, a), (sb, b)| {
                b.regret()
                    .total_cmp(&a.regret())
                    .then(a.best.delta.total_cmp(&b.best.delta))
                    .then(removed[*sa].cmp(&removed[*sb]))
            })
            .expect("removed set is non-empty");
        plan = view.plan;
        let client = removed.remove(slot);
        let Insertion { route, position, route_cost, .. } = options.best;
        let mut visits = plan.route(route).to_vec();
        visits.insert(position, client);
        plan.set_route_costed(route, visits, route_cost);
    }
    plan
}

/// Remove with the chosen neighborhood, then regret-insert. The input plan is
/// left untouched.
pub fn shake<R: Rng>(plan: &Plan, neighborhood: Neighborhood, r: f64, rng: &mut R, eval: &Evaluator<'_>) -> Result<Plan> {
    let partial = match neighborhood {
        Neighborhood::Random => remove_random(plan, r, rng, eval)?,
        Neighborhood::Relocation => remove_max_relocation(plan, r, eval)?,
        Neighborhood::Overlap => remove_overlap(plan, r, rng, eval)?,
    };
    Ok(regret_insert(partial, eval))
}
