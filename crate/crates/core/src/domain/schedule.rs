use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::{ClientId, CostParams, Route, Scenario, ScenarioSet};
use crate::{Error, Result};

/// Componentwise-minimal appointment times for a visit sequence.
///
/// The caregiver leaves the depot at time 0. The first appointment is the
/// latest possible arrival over all scenarios; each later appointment follows
/// the previous one by the largest service-plus-travel duration over all
/// scenarios. No scenario in `scenarios` ever arrives after its appointment.
pub fn canonical_schedule(visits: &[ClientId], scenarios: &ScenarioSet) -> Vec<f64> {
    let mut out = Vec::with_capacity(visits.len());
    canonical_into(visits, scenarios, &mut out);
    out
}

pub(crate) fn canonical_into(visits: &[ClientId], scenarios: &ScenarioSet, out: &mut Vec<f64>) {
    out.clear();
    let Some(&first) = visits.first() else {
        return;
    };
    let mut s = scenarios.iter().map(|sc| sc.travel_time[0][first]).fold(0.0, f64::max);
    out.push(s);
    for pair in visits.windows(2) {
        let (i, j) = (pair[0], pair[1]);
        let spacing = scenarios
            .iter()
            .map(|sc| sc.service_time[i] + sc.travel_time[i][j])
            .fold(0.0, f64::max);
        s += spacing;
        out.push(s);
    }
}

/// Latest return to the depot over all scenarios under the canonical schedule.
pub(crate) fn canonical_completion(visits: &[ClientId], schedule: &[f64], scenarios: &ScenarioSet) -> f64 {
    match (visits.last(), schedule.last()) {
        (Some(&last), Some(&s_last)) => {
            s_last
                + scenarios
                    .iter()
                    .map(|sc| sc.service_time[last] + sc.travel_time[last][0])
                    .fold(0.0, f64::max)
        }
        _ => 0.0,
    }
}

/// Realized timeline of one route under one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteTrace {
    pub visits: Vec<ClientId>,
    /// Arrival time `a_i`.
    pub arrival: Vec<f64>,
    /// Service begin `b_i = max(a_i, s_i)`.
    pub begin: Vec<f64>,
    /// Caregiver idle time `max(s_i - a_i, 0)`.
    pub earliness: Vec<f64>,
    /// Client wait `max(a_i - s_i, 0)`.
    pub tardiness: Vec<f64>,
    pub return_time: f64,
    pub overtime: f64,
}

impl RouteTrace {
    /// The waiting time `w_i` under a penalty mode; in `Both` mode this is the
    /// sum of the two separately tracked components.
    pub fn wait(&self, index: usize, params: &CostParams) -> f64 {
        match params.penalty_mode {
            super::PenaltyMode::Earliness => self.earliness[index],
            super::PenaltyMode::Tardiness => self.tardiness[index],
            super::PenaltyMode::Both => self.earliness[index] + self.tardiness[index],
        }
    }

    /// Money charged for waiting on this route.
    pub fn wait_penalty(&self, params: &CostParams) -> f64 {
        self.earliness
            .iter()
            .zip(&self.tardiness)
            .map(|(&e, &t)| params.visit_penalty(e, t))
            .sum()
    }
}

/// Simulate a route against a realized scenario with appointments held fixed.
pub fn simulate_route(
    route: &Route,
    schedule: &BTreeMap<ClientId, f64>,
    scenario: &Scenario,
    params: &CostParams,
) -> Result<RouteTrace> {
    let times = route
        .visits
        .iter()
        .map(|c| schedule.get(c).copied().ok_or(Error::MissingSchedule(*c)))
        .collect::<Result<Vec<_>>>()?;
    Ok(trace_aligned(&route.visits, &times, scenario, params))
}

pub(crate) fn trace_aligned(visits: &[ClientId], times: &[f64], scenario: &Scenario, params: &CostParams) -> RouteTrace {
    let n = visits.len();
    let mut trace = RouteTrace {
        visits: visits.to_vec(),
        arrival: Vec::with_capacity(n),
        begin: Vec::with_capacity(n),
        earliness: Vec::with_capacity(n),
        tardiness: Vec::with_capacity(n),
        return_time: 0.0,
        overtime: 0.0,
    };
    let mut prev = 0;
    let mut clock = 0.0;
    for (&client, &s) in visits.iter().zip(times) {
        let a = clock + scenario.travel_time[prev][client];
        let b = a.max(s);
        trace.arrival.push(a);
        trace.begin.push(b);
        trace.earliness.push((s - a).max(0.0));
        trace.tardiness.push((a - s).max(0.0));
        clock = b + scenario.service_time[client];
        prev = client;
    }
    if n > 0 {
        trace.return_time = clock + scenario.travel_time[prev][0];
        trace.overtime = (trace.return_time - params.shift_length).max(0.0);
    }
    trace
}

/// Wait and overtime penalties of one route under one scenario, without
/// materializing a trace. Mirrors [`trace_aligned`] step for step.
#[inline]
pub(crate) fn scenario_penalties(visits: &[ClientId], times: &[f64], scenario: &Scenario, params: &CostParams) -> (f64, f64) {
    if visits.is_empty() {
        return (0.0, 0.0);
    }
    let mut prev = 0;
    let mut clock = 0.0;
    let mut wait = 0.0;
    for (&client, &s) in visits.iter().zip(times) {
        let a = clock + scenario.travel_time[prev][client];
        wait += params.visit_penalty((s - a).max(0.0), (a - s).max(0.0));
        clock = a.max(s) + scenario.service_time[client];
        prev = client;
    }
    let ret = clock + scenario.travel_time[prev][0];
    (wait, params.c_overtime * (ret - params.shift_length).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PenaltyMode;

    /// Scenario over `n` clients where every leg takes `t` and service takes `ts`.
    fn flat(n: usize, t: f64, ts: f64) -> Scenario {
        let dim = n + 1;
        let travel_time = (0..dim).map(|i| (0..dim).map(|j| if i == j { 0.0 } else { t }).collect()).collect();
        let mut service_time = vec![ts; dim];
        service_time[0] = 0.0;
        Scenario { travel_time, service_time }
    }

    #[test]
    fn canonical_single_client() {
        let set = ScenarioSet::single(flat(1, 10.0, 30.0)).unwrap();
        assert_eq!(canonical_schedule(&[1], &set), vec![10.0]);
    }

    #[test]
    fn canonical_takes_max_over_scenarios() {
        let set = ScenarioSet::new(vec![flat(1, 10.0, 30.0), flat(1, 20.0, 30.0)], 0, "t").unwrap();
        assert_eq!(canonical_schedule(&[1], &set), vec![20.0]);
    }

    #[test]
    fn canonical_forward_recursion() {
        let mut sc = flat(2, 10.0, 30.0);
        sc.travel_time[1][2] = 5.0;
        sc.travel_time[2][1] = 5.0;
        let set = ScenarioSet::single(sc).unwrap();
        assert_eq!(canonical_schedule(&[1, 2], &set), vec![10.0, 45.0]);
    }

    #[test]
    fn canonical_empty_route() {
        let set = ScenarioSet::single(flat(1, 10.0, 30.0)).unwrap();
        assert!(canonical_schedule(&[], &set).is_empty());
    }

    fn params(mode: PenaltyMode) -> CostParams {
        CostParams { penalty_mode: mode, c_tardy_extra: 3.0, ..CostParams::default() }
    }

    #[test]
    fn early_arrival_waits() {
        let sc = flat(1, 10.0, 30.0);
        let trace = trace_aligned(&[1], &[20.0], &sc, &params(PenaltyMode::Earliness));
        assert_eq!(trace.arrival, vec![10.0]);
        assert_eq!(trace.begin, vec![20.0]);
        assert_eq!(trace.wait(0, &params(PenaltyMode::Earliness)), 10.0);
        assert_eq!(trace.wait(0, &params(PenaltyMode::Tardiness)), 0.0);
    }

    #[test]
    fn on_time_arrival_never_waits() {
        let sc = flat(1, 10.0, 30.0);
        for mode in [PenaltyMode::Earliness, PenaltyMode::Tardiness, PenaltyMode::Both] {
            let trace = trace_aligned(&[1], &[10.0], &sc, &params(mode));
            assert_eq!(trace.wait(0, &params(mode)), 0.0);
        }
    }

    #[test]
    fn late_arrival_is_tardy() {
        let sc = flat(1, 10.0, 30.0);
        let p = params(PenaltyMode::Both);
        let trace = trace_aligned(&[1], &[4.0], &sc, &p);
        assert_eq!(trace.begin, vec![10.0]);
        assert_eq!(trace.tardiness, vec![6.0]);
        assert_eq!(trace.wait_penalty(&p), 3.0 * 6.0);
        assert_eq!(trace.wait_penalty(&params(PenaltyMode::Earliness)), 0.0);
        assert_eq!(trace.wait_penalty(&params(PenaltyMode::Tardiness)), 2.0 * 6.0);
    }

    #[test]
    fn overtime_clamps_at_shift_end() {
        // depart 0, arrive 10, serve until 10 + ts, return at 20 + ts.
        let p = params(PenaltyMode::Earliness);
        let on_time = trace_aligned(&[1], &[10.0], &flat(1, 10.0, 460.0), &p);
        assert_eq!(on_time.return_time, 480.0);
        assert_eq!(on_time.overtime, 0.0);
        let late = trace_aligned(&[1], &[10.0], &flat(1, 10.0, 467.0), &p);
        assert_eq!(late.overtime, 7.0);
    }

    #[test]
    fn missing_schedule_entry() {
        let sc = flat(2, 10.0, 30.0);
        let mut schedule = BTreeMap::new();
        schedule.insert(1, 10.0);
        let err = simulate_route(&Route::new(1, vec![1, 2]), &schedule, &sc, &CostParams::default());
        assert!(matches!(err, Err(Error::MissingSchedule(2))));
    }

    #[test]
    fn fused_penalties_match_trace() {
        let mut sc = flat(3, 12.0, 40.0);
        sc.travel_time[1][3] = 31.0;
        sc.travel_time[3][1] = 31.0;
        for mode in [PenaltyMode::Earliness, PenaltyMode::Tardiness, PenaltyMode::Both] {
            let p = params(mode);
            let visits = [3, 1, 2];
            let times = [5.0, 90.0, 110.0];
            let trace = trace_aligned(&visits, &times, &sc, &p);
            let (wait, over) = scenario_penalties(&visits, &times, &sc, &p);
            assert!((wait - trace.wait_penalty(&p)).abs() < 1e-12);
            assert!((over - p.c_overtime * trace.overtime).abs() < 1e-12);
        }
    }
}
