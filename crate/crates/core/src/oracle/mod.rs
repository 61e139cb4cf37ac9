//! Ground truth for small instances: exhaustive search, a schedule grid
//! search, and an LP-file exporter for external MILP solvers.

mod enumerate;
mod grid;
mod lp;

pub use enumerate::{enumerate_optimal, ORACLE_CLIENT_LIMIT};
pub use grid::{grid_schedule_search, grid_schedules, is_feasible_schedule, schedule_cost, GRID_ROUTE_LIMIT};
pub use lp::{export_lp, lp_horizon, write_lp, LpExportConfig, LpModel};
