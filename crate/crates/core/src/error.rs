use thiserror::Error;

use crate::domain::{ClientId, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node {node} (instance has nodes 0..={last})")]
    UnknownNode { node: usize, last: usize },

    #[error("no scheduled start time for client {0}")]
    MissingSchedule(ClientId),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid scenario set: {0}")]
    InvalidScenarios(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("solution is not valid for the instance: {}", format_violations(.0))]
    InvalidSolution(Vec<Violation>),

    #[error("routes overlap on client {0}")]
    OverlappingRoutes(ClientId),

    #[error("client {0} is not routed")]
    UnroutedClient(ClientId),

    #[error("exact enumeration refuses {clients} clients (limit {limit})")]
    OracleTooLarge { clients: usize, limit: usize },

    #[error("baseline cost must be positive, got {0}")]
    NonPositiveBaseline(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
