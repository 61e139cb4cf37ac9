//! Joint caregiver routing and appointment scheduling.
//!
//! A caregiver fleet leaves a single depot, visits every client exactly once and
//! returns. Besides the routes, every client receives a scheduled service start
//! time. Travel and service times are random; a solution is scored by the sample
//! average of waiting and overtime penalties over a set of sampled scenarios, on
//! top of fixed dispatch and travel costs.
//!
//! The crate is organised bottom-up:
//!
//! * [`domain`]: data model, the canonical schedule recursion and cost evaluation.
//! * [`scenario`]: seeded generation of travel/service time realizations.
//! * [`construct`]: Clarke-Wright savings construction.
//! * [`neighborhoods`]: removal operators and regret-2 reinsertion.
//! * [`tabu`]: 2-opt / swap tabu search.
//! * [`vns`]: the variable neighborhood search driver.
//! * [`saa`]: sample average approximation bounds.
//! * [`oracle`]: exhaustive exact solver, schedule grid search and LP export.
//! * [`bench`]: instance generation and comparison harness.

pub mod bench;
pub mod construct;
pub mod domain;
mod error;
pub mod neighborhoods;
pub mod oracle;
pub mod saa;
pub mod scenario;
pub mod seeds;
pub mod tabu;
pub mod vns;

pub use error::{Error, Result};

/// Tolerance used when deciding whether one cost strictly improves on another.
pub const IMPROVEMENT_EPS: f64 = 1e-9;

/// Version tag written into every JSON artifact.
pub const FORMAT_VERSION: u32 = 1;

#[cfg(test)]
pub(crate) mod testutil;
