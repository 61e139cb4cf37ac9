use crate::domain::{scenario_penalties, ClientId, CostBreakdown, Evaluator, ScenarioSet};
use crate::{Error, Result};

/// Longest route accepted by the grid search.
pub const GRID_ROUTE_LIMIT: usize = 3;

/// Cost of a route under an arbitrary schedule, averaged over the evaluator's
/// scenarios.
pub fn schedule_cost(eval: &Evaluator<'_>, visits: &[ClientId], schedule: &[f64]) -> CostBreakdown {
    if visits.is_empty() {
        return CostBreakdown::default();
    }
    let params = &eval.instance().params;
    let (mut wait, mut over) = (0.0, 0.0);
    for scenario in eval.scenarios().iter() {
        let (w, o) = scenario_penalties(visits, schedule, scenario, params);
        wait += w;
        over += o;
    }
    let m = eval.scenarios().len() as f64;
    CostBreakdown::new(params.c_fixed, eval.route_travel(visits), wait / m, over / m)
}

fn leg_bounds(visits: &[ClientId], scenarios: &ScenarioSet) -> Vec<f64> {
    let mut prev = 0;
    visits
        .iter()
        .map(|&v| {
            let leg = scenarios
                .iter()
                .map(|sc| sc.service(prev) + sc.travel(prev, v))
                .fold(f64::NEG_INFINITY, f64::max);
            prev = v;
            leg
        })
        .collect()
}

/// Whether every scheduled gap covers the corresponding service plus travel
/// time in every scenario, starting from a depot departure at time 0.
pub fn is_feasible_schedule(visits: &[ClientId], schedule: &[f64], scenarios: &ScenarioSet) -> bool {
    let mut prev_time = 0.0;
    leg_bounds(visits, scenarios).iter().zip(schedule).all(|(leg, &s)| {
        let ok = s >= prev_time + leg - 1e-9;
        prev_time = s;
        ok
    })
}

/// Every schedule whose gaps exceed the canonical minimum by a multiple of
/// `step` no larger than `max_offset`.
pub fn grid_schedules(visits: &[ClientId], scenarios: &ScenarioSet, step: f64, max_offset: f64) -> Result<Vec<Vec<f64>>> {
    if visits.len() > GRID_ROUTE_LIMIT {
        return Err(Error::InvalidConfig(format!(
            "grid search handles routes of at most {GRID_ROUTE_LIMIT} visits, got {}",
            visits.len()
        )));
    }
    if !(step > 0.0) || !(max_offset >= 0.0) {
        return Err(Error::InvalidConfig("grid step must be positive and the offset bound non-negative".into()));
    }
    let legs = leg_bounds(visits, scenarios);
    let offsets: Vec<f64> = (0..=(max_offset / step + 1e-9).floor() as usize).map(|i| i as f64 * step).collect();
    let mut out = vec![Vec::with_capacity(visits.len())];
    for leg in legs {
        out = out
            .into_iter()
            .flat_map(|partial: Vec<f64>| {
                let base = partial.last().copied().unwrap_or(0.0) + leg;
                offsets.iter().map(move |o| {
                    let mut next = partial.clone();
                    next.push(base + o);
                    next
                })
            })
            .collect();
    }
    Ok(out)
}

/// Cheapest schedule on the grid. The canonical schedule is the all-zero
/// offset point, which comes first, so it wins every tie.
pub fn grid_schedule_search(eval: &Evaluator<'_>, visits: &[ClientId], step: f64, max_offset: f64) -> Result<(Vec<f64>, f64)> {
    let mut best = (Vec::new(), f64::INFINITY);
    for schedule in grid_schedules(visits, eval.scenarios(), step, max_offset)? {
        let cost = schedule_cost(eval, visits, &schedule).total;
        if cost < best.1 {
            best = (schedule, cost);
        }
    }
    Ok(best)
}
