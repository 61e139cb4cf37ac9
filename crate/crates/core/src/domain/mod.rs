//! Data model, canonical schedules and cost evaluation.
//!
//! Node numbering follows the usual depot-duplicated graph: node `0` is the
//! depot as origin, nodes `1..=n` are clients and node `n + 1` is the depot as
//! destination. Both depot copies share coordinates, and scenario tables only
//! store the physical nodes `0..=n`.

mod evaluate;
mod model;
mod plan;
mod schedule;
mod validate;

pub use evaluate::{evaluate, evaluate_deterministic, evaluate_per_scenario, travel_cost, ScenarioCosts};
pub use model::{
    Client, ClientId, CostBreakdown, CostParams, Instance, NodeId, PenaltyMode, Route, Scenario,
    ScenarioSet, Solution,
};
pub use plan::{Evaluator, Plan};
pub use schedule::{canonical_schedule, simulate_route, RouteTrace};
pub(crate) use schedule::scenario_penalties;
pub use validate::{validate_solution, Violation};
