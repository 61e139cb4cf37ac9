//! Seeded generation of travel and service time realizations.
//!
//! Travel time on an edge is the Euclidean distance scaled by a uniform factor
//! drawn per unordered node pair and per scenario. Service times follow a
//! log-normal distribution truncated to a fixed interval by rejection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::domain::{Instance, Scenario, ScenarioSet};
use crate::{Error, Result};

/// Minimum probability mass the truncation interval must carry; below this
/// rejection sampling would effectively never terminate.
const MIN_ACCEPTANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub gamma_low: f64,
    pub gamma_high: f64,
    /// Mean of the untruncated service-time distribution (minutes).
    pub service_mu: f64,
    /// Standard deviation of the untruncated distribution; `0` makes service
    /// times deterministic and equal to `service_mu`.
    pub service_sigma: f64,
    pub service_low: f64,
    pub service_high: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self { gamma_low: 0.5, gamma_high: 1.5, service_mu: 60.0, service_sigma: 30.0, service_low: 30.0, service_high: 90.0 }
    }
}

impl ScenarioConfig {
    /// No randomness at all: unit travel factor and constant service time.
    pub fn deterministic() -> Self {
        Self { gamma_low: 1.0, gamma_high: 1.0, service_sigma: 0.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.gamma_low >= 0.0 && self.gamma_low <= self.gamma_high && self.gamma_high.is_finite()) {
            return bad(format!("need 0 <= gamma_low <= gamma_high, got [{}, {}]", self.gamma_low, self.gamma_high));
        }
        if !(self.service_low >= 0.0 && self.service_low < self.service_high && self.service_high.is_finite()) {
            return bad(format!(
                "need 0 <= service_low < service_high, got [{}, {}]",
                self.service_low, self.service_high
            ));
        }
        if !(self.service_mu > 0.0 && self.service_mu.is_finite()) {
            return bad(format!("service_mu must be positive, got {}", self.service_mu));
        }
        if !(self.service_sigma >= 0.0 && self.service_sigma.is_finite()) {
            return bad(format!("service_sigma must be >= 0, got {}", self.service_sigma));
        }
        if self.service_sigma == 0.0 {
            if !(self.service_low..=self.service_high).contains(&self.service_mu) {
                return bad("deterministic service time lies outside the truncation bounds".into());
            }
        } else if self.acceptance_probability() < MIN_ACCEPTANCE {
            return bad("truncation interval carries almost no probability mass".into());
        }
        Ok(())
    }

    /// Parameters `(mu, sigma)` of the underlying normal so that the
    /// untruncated log-normal has mean `service_mu` and sd `service_sigma`.
    pub fn log_normal_params(&self) -> (f64, f64) {
        let cv = self.service_sigma / self.service_mu;
        let var = (1.0 + cv * cv).ln();
        (self.service_mu.ln() - 0.5 * var, var.sqrt())
    }

    fn acceptance_probability(&self) -> f64 {
        let (mu, sigma) = self.log_normal_params();
        let phi = Normal::standard();
        let z = |x: f64| (x.ln() - mu) / sigma;
        phi.cdf(z(self.service_high)) - phi.cdf(z(self.service_low))
    }

    /// Closed-form mean of the truncated log-normal service time.
    pub fn truncated_service_mean(&self) -> f64 {
        if self.service_sigma == 0.0 {
            return self.service_mu;
        }
        let (mu, sigma) = self.log_normal_params();
        let phi = Normal::standard();
        let (la, lb) = (self.service_low.ln(), self.service_high.ln());
        let mass = phi.cdf((lb - mu) / sigma) - phi.cdf((la - mu) / sigma);
        let shifted = phi.cdf((lb - mu - sigma * sigma) / sigma) - phi.cdf((la - mu - sigma * sigma) / sigma);
        (mu + 0.5 * sigma * sigma).exp() * shifted / mass
    }
}

/// Sampler for one scenario's random quantities.
struct Sampler {
    config: ScenarioConfig,
    service: Option<LogNormal<f64>>,
}

impl Sampler {
    fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let service = if config.service_sigma > 0.0 {
            let (mu, sigma) = config.log_normal_params();
            Some(LogNormal::new(mu, sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?)
        } else {
            None
        };
        Ok(Self { config, service })
    }

    fn gamma<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.config.gamma_low == self.config.gamma_high {
            self.config.gamma_low
        } else {
            rng.random_range(self.config.gamma_low..self.config.gamma_high)
        }
    }

    fn service_time<R: Rng>(&self, rng: &mut R) -> f64 {
        let Some(dist) = &self.service else {
            return self.config.service_mu;
        };
        loop {
            let x = dist.sample(rng);
            if x >= self.config.service_low && x <= self.config.service_high {
                return x;
            }
        }
    }

    fn scenario<R: Rng>(&self, instance: &Instance, rng: &mut R) -> Scenario {
        let dim = instance.client_count() + 1;
        let mut travel_time = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            for j in (i + 1)..dim {
                let d = instance.distance(i, j).expect("node within instance");
                let t = self.gamma(rng) * d;
                travel_time[i][j] = t;
                travel_time[j][i] = t;
            }
        }
        let mut service_time = vec![0.0; dim];
        for ts in service_time.iter_mut().skip(1) {
            *ts = self.service_time(rng);
        }
        Scenario { travel_time, service_time }
    }
}

/// Draw one scenario from `rng`.
pub fn build_scenario<R: Rng>(instance: &Instance, config: &ScenarioConfig, rng: &mut R) -> Result<Scenario> {
    Ok(Sampler::new(*config)?.scenario(instance, rng))
}

/// The random stream used for scenario `index` of a set seeded with `seed`.
pub fn scenario_stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// `m` scenarios, scenario `i` drawn from its own ChaCha stream of `seed`.
pub fn build_scenario_set(instance: &Instance, m: usize, seed: u64, config: &ScenarioConfig) -> Result<ScenarioSet> {
    if m == 0 {
        return Err(Error::InvalidConfig("scenario count must be at least 1".into()));
    }
    let sampler = Sampler::new(*config)?;
    let scenarios = (0..m)
        .map(|i| sampler.scenario(instance, &mut scenario_stream(seed, i)))
        .collect();
    ScenarioSet::new(scenarios, seed, format!("m{m}-seed{seed}"))
}

/// Entrywise arithmetic mean of a scenario set.
///
/// Accumulates deviations from the first scenario, so a set of identical
/// scenarios averages to exactly that scenario.
pub fn mean_scenario(set: &ScenarioSet) -> Result<Scenario> {
    let Some(first) = set.scenarios.first() else {
        return Err(Error::InvalidScenarios("cannot average an empty scenario set".into()));
    };
    let m = set.len() as f64;
    let mut travel_dev = vec![vec![0.0; first.travel_time.len()]; first.travel_time.len()];
    let mut service_dev = vec![0.0; first.service_time.len()];
    for scenario in set.iter() {
        for ((acc, row), base) in travel_dev.iter_mut().zip(&scenario.travel_time).zip(&first.travel_time) {
            for ((a, t), b) in acc.iter_mut().zip(row).zip(base) {
                *a += t - b;
            }
        }
        for ((a, t), b) in service_dev.iter_mut().zip(&scenario.service_time).zip(&first.service_time) {
            *a += t - b;
        }
    }
    let travel_time = first
        .travel_time
        .iter()
        .zip(&travel_dev)
        .map(|(row, dev)| row.iter().zip(dev).map(|(b, d)| b + d / m).collect())
        .collect();
    let service_time = first.service_time.iter().zip(&service_dev).map(|(b, d)| b + d / m).collect();
    Ok(Scenario { travel_time, service_time })
}

/// Mean scenario wrapped as a singleton set, the input of the deterministic model.
pub fn mean_scenario_set(set: &ScenarioSet) -> Result<ScenarioSet> {
    ScenarioSet::new(vec![mean_scenario(set)?], set.seed, format!("mean-of-{}", set.label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::generate_instance;

    #[test]
    fn unit_gamma_gives_euclidean_travel() {
        let instance = generate_instance(6, 3);
        let set = build_scenario_set(&instance, 2, 1, &ScenarioConfig::deterministic()).unwrap();
        for sc in set.iter() {
            for i in 0..=6 {
                for j in 0..=6 {
                    assert_eq!(sc.travel_time[i][j], instance.distance(i, j).unwrap());
                }
            }
            assert!(sc.service_time[1..].iter().all(|&t| t == 60.0));
        }
    }

    #[test]
    fn service_times_respect_truncation() {
        let instance = generate_instance(20, 5);
        let set = build_scenario_set(&instance, 30, 9, &ScenarioConfig::default()).unwrap();
        for sc in set.iter() {
            assert!(sc.service_time[1..].iter().all(|&t| (30.0..=90.0).contains(&t)));
            assert_eq!(sc.service_time[0], 0.0);
            sc.validate().unwrap();
        }
    }

    #[test]
    fn same_seed_same_set() {
        let instance = generate_instance(5, 1);
        let a = build_scenario_set(&instance, 30, 42, &ScenarioConfig::default()).unwrap();
        let b = build_scenario_set(&instance, 30, 42, &ScenarioConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 30);
        let c = build_scenario_set(&instance, 30, 43, &ScenarioConfig::default()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn scenarios_within_a_set_are_distinct() {
        let instance = generate_instance(5, 1);
        let set = build_scenario_set(&instance, 30, 42, &ScenarioConfig::default()).unwrap();
        for i in 0..set.len() {
            for j in (i + 1)..set.len() {
                assert_ne!(set.scenarios[i], set.scenarios[j]);
            }
        }
    }

    #[test]
    fn prefix_stability() {
        let instance = generate_instance(5, 1);
        let small = build_scenario_set(&instance, 3, 7, &ScenarioConfig::default()).unwrap();
        let large = build_scenario_set(&instance, 10, 7, &ScenarioConfig::default()).unwrap();
        assert_eq!(small.scenarios[..], large.scenarios[..3]);
    }

    #[test]
    fn zero_scenarios_is_an_error() {
        let instance = generate_instance(5, 1);
        assert!(build_scenario_set(&instance, 0, 7, &ScenarioConfig::default()).is_err());
    }

    #[test]
    fn mean_of_two() {
        let a = Scenario { travel_time: vec![vec![0.0, 10.0], vec![10.0, 0.0]], service_time: vec![0.0, 30.0] };
        let mut b = a.clone();
        b.travel_time[0][1] = 20.0;
        b.travel_time[1][0] = 20.0;
        let set = ScenarioSet::new(vec![a.clone(), b], 0, "t").unwrap();
        let mean = mean_scenario(&set).unwrap();
        assert_eq!(mean.travel_time[0][1], 15.0);
        assert_eq!(mean.service_time[1], 30.0);
        let same = ScenarioSet::new(vec![a.clone(), a.clone(), a.clone()], 0, "t").unwrap();
        assert_eq!(mean_scenario(&same).unwrap(), a);
    }

    #[test]
    fn log_normal_moments() {
        let (mu, sigma) = ScenarioConfig::default().log_normal_params();
        let mean = (mu + sigma * sigma / 2.0).exp();
        let sd = ((sigma * sigma).exp() - 1.0).sqrt() * mean;
        assert!((mean - 60.0).abs() < 1e-9);
        assert!((sd - 30.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_configs() {
        let c = ScenarioConfig { gamma_low: 2.0, gamma_high: 1.0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = ScenarioConfig { service_low: 90.0, service_high: 30.0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = ScenarioConfig { service_mu: 1e6, service_sigma: 1.0, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
