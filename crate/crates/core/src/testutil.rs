use crate::bench::generate_instance;
use crate::domain::{Instance, Scenario, ScenarioSet};
use crate::scenario::{build_scenario_set, ScenarioConfig};

/// Single scenario: travel time equals distance, constant service time.
pub fn euclid_set(instance: &Instance, service: f64) -> ScenarioSet {
    let dim = instance.client_count() + 1;
    let travel_time = (0..dim)
        .map(|i| (0..dim).map(|j| instance.distance(i, j).unwrap()).collect())
        .collect();
    let mut service_time = vec![service; dim];
    service_time[0] = 0.0;
    ScenarioSet::single(Scenario { travel_time, service_time }).unwrap()
}

/// Generated instance with `m` default-config scenarios.
pub fn random_case(n: usize, m: usize, seed: u64) -> (Instance, ScenarioSet) {
    let instance = generate_instance(n, seed);
    let set = build_scenario_set(&instance, m, seed ^ 0xABCD, &ScenarioConfig::default()).unwrap();
    (instance, set)
}
