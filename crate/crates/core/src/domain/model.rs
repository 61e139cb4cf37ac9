use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, FORMAT_VERSION};

/// Client identifier, `1..=n`.
pub type ClientId = usize;

/// Graph node: `0` origin depot, `1..=n` clients, `n + 1` destination depot.
pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Client {
    pub id: ClientId,
    pub x: f64,
    pub y: f64,
}

/// Which deviation from the appointment is penalized at a client.
///
/// `Earliness` charges the caregiver's idle time `max(s - a, 0)` before an
/// appointment. `Tardiness` charges the client's wait `max(a - s, 0)`. `Both`
/// charges earliness at `c_wait` and tardiness at `c_tardy_extra`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyMode {
    #[default]
    Earliness,
    Tardiness,
    Both,
}

impl fmt::Display for PenaltyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PenaltyMode::Earliness => "earliness",
            PenaltyMode::Tardiness => "tardiness",
            PenaltyMode::Both => "both",
        })
    }
}

impl std::str::FromStr for PenaltyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "earliness" => Ok(PenaltyMode::Earliness),
            "tardiness" => Ok(PenaltyMode::Tardiness),
            "both" => Ok(PenaltyMode::Both),
            other => Err(Error::InvalidConfig(format!("unknown penalty mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Cost per dispatched caregiver.
    pub c_fixed: f64,
    /// Cost per minute of overtime.
    pub c_overtime: f64,
    /// Cost per minute of penalized waiting.
    pub c_wait: f64,
    /// Travel cost per distance unit.
    pub travel_cost_factor: f64,
    /// Shift length in minutes.
    pub shift_length: f64,
    #[serde(default)]
    pub penalty_mode: PenaltyMode,
    /// Tardiness rate, only charged in [`PenaltyMode::Both`].
    #[serde(default)]
    pub c_tardy_extra: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            c_fixed: 100.0,
            c_overtime: 1.0,
            c_wait: 2.0,
            travel_cost_factor: 0.5,
            shift_length: 480.0,
            penalty_mode: PenaltyMode::Earliness,
            c_tardy_extra: 0.0,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("c_fixed", self.c_fixed),
            ("c_overtime", self.c_overtime),
            ("c_wait", self.c_wait),
            ("travel_cost_factor", self.travel_cost_factor),
            ("c_tardy_extra", self.c_tardy_extra),
        ];
        for (name, value) in rates {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidInstance(format!("{name} must be a finite rate >= 0, got {value}")));
            }
        }
        if !(self.shift_length.is_finite() && self.shift_length > 0.0) {
            return Err(Error::InvalidInstance(format!(
                "shift_length must be positive, got {}",
                self.shift_length
            )));
        }
        Ok(())
    }

    /// Penalty charged for one visit given its earliness and tardiness in minutes.
    #[inline]
    pub fn visit_penalty(&self, earliness: f64, tardiness: f64) -> f64 {
        match self.penalty_mode {
            PenaltyMode::Earliness => self.c_wait * earliness,
            PenaltyMode::Tardiness => self.c_wait * tardiness,
            PenaltyMode::Both => self.c_wait * earliness + self.c_tardy_extra * tardiness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    pub clients: Vec<Client>,
    pub depot: [f64; 2],
    pub caregiver_count: usize,
    pub params: CostParams,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    #[serde(default = "format_version")]
    format_version: u32,
    depot: [f64; 2],
    clients: Vec<Client>,
    caregivers: usize,
    params: CostParams,
}

fn format_version() -> u32 {
    FORMAT_VERSION
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        if file.format_version != FORMAT_VERSION {
            return Err(Error::InvalidInstance(format!(
                "unsupported format_version {}",
                file.format_version
            )));
        }
        Instance::new(file.depot, file.clients, file.caregivers, file.params)
    }
}

impl From<Instance> for InstanceFile {
    fn from(instance: Instance) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            depot: instance.depot,
            clients: instance.clients,
            caregivers: instance.caregiver_count,
            params: instance.params,
        }
    }
}

impl Instance {
    pub fn new(depot: [f64; 2], clients: Vec<Client>, caregiver_count: usize, params: CostParams) -> Result<Self> {
        let instance = Self { clients, depot, caregiver_count, params };
        instance.validate()?;
        Ok(instance)
    }

    pub fn validate(&self) -> Result<()> {
        if self.caregiver_count == 0 {
            return Err(Error::InvalidInstance("at least one caregiver is required".into()));
        }
        if self.clients.is_empty() {
            return Err(Error::InvalidInstance("at least one client is required".into()));
        }
        if !self.depot.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInstance("depot coordinates must be finite".into()));
        }
        for (index, client) in self.clients.iter().enumerate() {
            if client.id != index + 1 {
                return Err(Error::InvalidInstance(format!(
                    "client ids must be contiguous from 1: position {} holds id {}",
                    index + 1,
                    client.id
                )));
            }
            if !(client.x.is_finite() && client.y.is_finite()) {
                return Err(Error::InvalidInstance(format!("client {} has non-finite coordinates", client.id)));
            }
        }
        self.params.validate()
    }

    pub fn client_count(&self) -> usize {
        self.clients.len()
    }

    /// Index of the destination depot copy, `n + 1`.
    pub fn destination(&self) -> NodeId {
        self.clients.len() + 1
    }

    /// Coordinates of any node, depot copies included.
    pub fn coords(&self, node: NodeId) -> Result<[f64; 2]> {
        let n = self.clients.len();
        match node {
            0 => Ok(self.depot),
            i if i <= n => {
                let c = &self.clients[i - 1];
                Ok([c.x, c.y])
            }
            i if i == n + 1 => Ok(self.depot),
            i => Err(Error::UnknownNode { node: i, last: n + 1 }),
        }
    }

    /// Euclidean distance between two nodes.
    pub fn distance(&self, i: NodeId, j: NodeId) -> Result<f64> {
        let [xi, yi] = self.coords(i)?;
        let [xj, yj] = self.coords(j)?;
        Ok((xi - xj).hypot(yi - yj))
    }

    pub fn client_ids(&self) -> impl Iterator<Item = ClientId> + '_ {
        1..=self.clients.len()
    }
}

/// One realization of travel and service times.
///
/// `travel_time[i][j]` covers the physical nodes `0..=n` (node 0 stands for both
/// depot copies). `service_time[0]` is the depot and always zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub travel_time: Vec<Vec<f64>>,
    pub service_time: Vec<f64>,
}

impl Scenario {
    /// Number of clients the tables are dimensioned for.
    pub fn client_count(&self) -> usize {
        self.service_time.len().saturating_sub(1)
    }

    /// Travel time between two nodes; the destination depot `n + 1` maps to 0.
    #[inline]
    pub fn travel(&self, i: NodeId, j: NodeId) -> f64 {
        let n = self.client_count();
        let fold = |v: NodeId| if v == n + 1 { 0 } else { v };
        self.travel_time[fold(i)][fold(j)]
    }

    #[inline]
    pub fn service(&self, node: NodeId) -> f64 {
        self.service_time.get(node).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.service_time.len();
        if dim < 2 {
            return Err(Error::InvalidScenarios("scenario must cover at least one client".into()));
        }
        if self.service_time[0] != 0.0 {
            return Err(Error::InvalidScenarios("depot service time must be zero".into()));
        }
        if self.travel_time.len() != dim || self.travel_time.iter().any(|row| row.len() != dim) {
            return Err(Error::InvalidScenarios(format!("travel table must be {dim}x{dim}")));
        }
        for (i, row) in self.travel_time.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(Error::InvalidScenarios(format!("travel_time[{i}][{i}] must be zero")));
            }
            for (j, &t) in row.iter().enumerate() {
                if !(t.is_finite() && t >= 0.0) {
                    return Err(Error::InvalidScenarios(format!("travel_time[{i}][{j}] = {t} is not a valid duration")));
                }
                if t != self.travel_time[j][i] {
                    return Err(Error::InvalidScenarios(format!("travel table is not symmetric at ({i}, {j})")));
                }
            }
        }
        if let Some(bad) = self.service_time.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidScenarios(format!("service time {bad} is not a valid duration")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioSetFile", into = "ScenarioSetFile")]
pub struct ScenarioSet {
    pub scenarios: Vec<Scenario>,
    pub seed: u64,
    pub label: String,
}

#[derive(Serialize, Deserialize)]
struct ScenarioSetFile {
    #[serde(default = "format_version")]
    format_version: u32,
    seed: u64,
    label: String,
    scenarios: Vec<Scenario>,
}

impl TryFrom<ScenarioSetFile> for ScenarioSet {
    type Error = Error;

    fn try_from(file: ScenarioSetFile) -> Result<Self> {
        if file.format_version != FORMAT_VERSION {
            return Err(Error::InvalidScenarios(format!("unsupported format_version {}", file.format_version)));
        }
        ScenarioSet::new(file.scenarios, file.seed, file.label)
    }
}

impl From<ScenarioSet> for ScenarioSetFile {
    fn from(set: ScenarioSet) -> Self {
        Self { format_version: FORMAT_VERSION, seed: set.seed, label: set.label, scenarios: set.scenarios }
    }
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<Scenario>, seed: u64, label: impl Into<String>) -> Result<Self> {
        let Some(first) = scenarios.first() else {
            return Err(Error::InvalidScenarios("a scenario set needs at least one scenario".into()));
        };
        let n = first.client_count();
        for scenario in &scenarios {
            scenario.validate()?;
            if scenario.client_count() != n {
                return Err(Error::InvalidScenarios("scenarios are dimensioned for different instances".into()));
            }
        }
        Ok(Self { scenarios, seed, label: label.into() })
    }

    /// A set holding exactly one scenario.
    pub fn single(scenario: Scenario) -> Result<Self> {
        Self::new(vec![scenario], 0, "single")
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn client_count(&self) -> usize {
        self.scenarios[0].client_count()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Scenario> {
        self.scenarios.iter()
    }

    pub(crate) fn check_dimension(&self, instance: &Instance) -> Result<()> {
        if self.client_count() != instance.client_count() {
            return Err(Error::InvalidScenarios(format!(
                "scenario set covers {} clients, instance has {}",
                self.client_count(),
                instance.client_count()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub caregiver: usize,
    pub visits: Vec<ClientId>,
}

impl Route {
    pub fn new(caregiver: usize, visits: Vec<ClientId>) -> Self {
        Self { caregiver, visits }
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }
}

/// Routes (one per caregiver) plus the scheduled start time of every client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SolutionFile", into = "SolutionFile")]
pub struct Solution {
    pub routes: Vec<Route>,
    pub schedule: BTreeMap<ClientId, f64>,
}

#[derive(Serialize, Deserialize)]
struct SolutionFile {
    #[serde(default = "format_version")]
    format_version: u32,
    routes: Vec<Route>,
    schedule: BTreeMap<ClientId, f64>,
}

impl TryFrom<SolutionFile> for Solution {
    type Error = Error;

    fn try_from(file: SolutionFile) -> Result<Self> {
        if file.format_version != FORMAT_VERSION {
            return Err(Error::InvalidConfig(format!("unsupported solution format_version {}", file.format_version)));
        }
        Ok(Solution { routes: file.routes, schedule: file.schedule })
    }
}

impl From<Solution> for SolutionFile {
    fn from(solution: Solution) -> Self {
        Self { format_version: FORMAT_VERSION, routes: solution.routes, schedule: solution.schedule }
    }
}

impl Solution {
    /// `caregiver_count` empty routes and an empty schedule.
    pub fn empty(caregiver_count: usize) -> Self {
        Self {
            routes: (1..=caregiver_count).map(|k| Route::new(k, Vec::new())).collect(),
            schedule: BTreeMap::new(),
        }
    }

    pub fn non_empty_routes(&self) -> usize {
        self.routes.iter().filter(|r| !r.is_empty()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub fixed: f64,
    pub travel: f64,
    pub wait_penalty: f64,
    pub overtime_penalty: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(fixed: f64, travel: f64, wait_penalty: f64, overtime_penalty: f64) -> Self {
        Self { fixed, travel, wait_penalty, overtime_penalty, total: fixed + travel + wait_penalty + overtime_penalty }
    }
}

impl Add for CostBreakdown {
    type Output = CostBreakdown;

    fn add(self, rhs: Self) -> Self {
        CostBreakdown::new(
            self.fixed + rhs.fixed,
            self.travel + rhs.travel,
            self.wait_penalty + rhs.wait_penalty,
            self.overtime_penalty + rhs.overtime_penalty,
        )
    }
}

impl AddAssign for CostBreakdown {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for CostBreakdown {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(CostBreakdown::default(), Add::add)
    }
}

impl fmt::Display for CostBreakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "total {:.4} (fixed {:.4}, travel {:.4}, wait {:.4}, overtime {:.4})",
            self.total, self.fixed, self.travel, self.wait_penalty, self.overtime_penalty
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny_instance() -> Instance {
        Instance::new(
            [0.0, 0.0],
            vec![Client { id: 1, x: 0.0, y: 10.0 }, Client { id: 2, x: 0.0, y: 20.0 }],
            1,
            CostParams::default(),
        )
        .unwrap()
    }

    #[test]
    fn rejects_non_contiguous_ids() {
        let err = Instance::new([0.0, 0.0], vec![Client { id: 2, x: 0.0, y: 0.0 }], 1, CostParams::default());
        assert!(matches!(err, Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn rejects_zero_caregivers() {
        let err = Instance::new([0.0, 0.0], vec![Client { id: 1, x: 0.0, y: 0.0 }], 0, CostParams::default());
        assert!(matches!(err, Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn instance_json_shape() {
        let json = serde_json::to_value(tiny_instance()).unwrap();
        assert_eq!(json["format_version"], 1);
        assert_eq!(json["caregivers"], 1);
        assert_eq!(json["depot"], serde_json::json!([0.0, 0.0]));
        assert_eq!(json["clients"][1]["id"], 2);
        assert_eq!(json["params"]["shift_length"], 480.0);
        let back: Instance = serde_json::from_value(json).unwrap();
        assert_eq!(back, tiny_instance());
    }

    #[test]
    fn instance_json_without_optional_fields() {
        let text = r#"{"depot":[0,0],"clients":[{"id":1,"x":1,"y":2}],"caregivers":1,
            "params":{"c_fixed":100,"c_overtime":1,"c_wait":2,"travel_cost_factor":0.5,"shift_length":480}}"#;
        let instance: Instance = serde_json::from_str(text).unwrap();
        assert_eq!(instance.params.penalty_mode, PenaltyMode::Earliness);
        assert_eq!(instance.params.c_tardy_extra, 0.0);
    }

    #[test]
    fn solution_schedule_keys_are_ids() {
        let mut solution = Solution::empty(1);
        solution.routes[0].visits = vec![1];
        solution.schedule.insert(1, 10.0);
        let json = serde_json::to_string(&solution).unwrap();
        assert!(json.contains(r#""schedule":{"1":10.0}"#), "{json}");
        let back: Solution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, solution);
    }

    #[test]
    fn scenario_rejects_asymmetry() {
        let scenario = Scenario { travel_time: vec![vec![0.0, 1.0], vec![2.0, 0.0]], service_time: vec![0.0, 5.0] };
        assert!(scenario.validate().is_err());
    }

    #[test]
    fn destination_depot_folds_to_origin() {
        let scenario = Scenario { travel_time: vec![vec![0.0, 3.0], vec![3.0, 0.0]], service_time: vec![0.0, 5.0] };
        assert_eq!(scenario.travel(1, 2), 3.0);
        assert_eq!(scenario.travel(0, 2), 0.0);
    }

    #[test]
    fn breakdown_total_is_sum() {
        let c = CostBreakdown::new(1.0, 2.0, 3.0, 4.0) + CostBreakdown::new(0.5, 0.25, 0.0, 1.0);
        assert_eq!(c.total, c.fixed + c.travel + c.wait_penalty + c.overtime_penalty);
    }
}
