use std::fmt;

use serde::{Deserialize, Serialize};

use super::model::{ClientId, Instance, Solution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    RouteCount { expected: usize, found: usize },
    BadCaregiver(usize),
    DuplicatedCaregiver(usize),
    UnknownClient(ClientId),
    UnservedClient(ClientId),
    DuplicatedClient(ClientId),
    MissingSchedule(ClientId),
    NegativeSchedule(ClientId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RouteCount { expected, found } => write!(f, "expected {expected} routes, found {found}"),
            Violation::BadCaregiver(k) => write!(f, "caregiver {k} does not exist"),
            Violation::DuplicatedCaregiver(k) => write!(f, "caregiver {k} owns more than one route"),
            Violation::UnknownClient(c) => write!(f, "unknown client {c}"),
            Violation::UnservedClient(c) => write!(f, "unserved client {c}"),
            Violation::DuplicatedClient(c) => write!(f, "duplicated client {c}"),
            Violation::MissingSchedule(c) => write!(f, "client {c} has no scheduled start"),
            Violation::NegativeSchedule(c) => write!(f, "client {c} has a negative or non-finite scheduled start"),
        }
    }
}

/// Every way `solution` fails to be a valid plan for `instance`; empty when valid.
pub fn validate_solution(solution: &Solution, instance: &Instance) -> Vec<Violation> {
    let mut violations = Vec::new();
    let k = instance.caregiver_count;
    if solution.routes.len() != k {
        violations.push(Violation::RouteCount { expected: k, found: solution.routes.len() });
    }

    let mut owner_seen = vec![false; k + 1];
    for route in &solution.routes {
        if route.caregiver == 0 || route.caregiver > k {
            violations.push(Violation::BadCaregiver(route.caregiver));
        } else if std::mem::replace(&mut owner_seen[route.caregiver], true) {
            violations.push(Violation::DuplicatedCaregiver(route.caregiver));
        }
    }

    let n = instance.client_count();
    let mut visits = vec![0usize; n + 1];
    for &c in solution.routes.iter().flat_map(|r| &r.visits) {
        if c == 0 || c > n {
            violations.push(Violation::UnknownClient(c));
        } else {
            visits[c] += 1;
        }
    }
    for c in 1..=n {
        match visits[c] {
            0 => violations.push(Violation::UnservedClient(c)),
            1 => {}
            _ => violations.push(Violation::DuplicatedClient(c)),
        }
        match solution.schedule.get(&c) {
            None => violations.push(Violation::MissingSchedule(c)),
            Some(s) if !(s.is_finite() && *s >= 0.0) => violations.push(Violation::NegativeSchedule(c)),
            Some(_) => {}
        }
    }
    violations
}
