//! CPLEX LP text for the routing and scheduling MILP.
//!
//! Variables:
//! - `x_i_j_k`: caregiver `k` travels from node `i` to node `j`, with node
//!   `n + 1` the returning depot. Arcs that cannot be used are fixed to 0.
//! - `s_i`: scheduled start at client `i`.
//! - `a_i`, `b_i`: arrival and service begin; `w_i` the penalized wait (or
//!   `e_i` and `d_i` for earliness and tardiness separately); `o_k` overtime.
//!   In the sampled model these carry a 1-based scenario suffix, `a_i_m`.
//!
//! Arrival propagation on used arcs is a two-sided big-M equality. Service
//! begin is pinned to the schedule: the spacing constraints already force
//! arrivals no later than the schedule on every scenario, so `b = max(a, s)`
//! reduces to `b = s`, and the explicit upper bound stops `b` from drifting
//! upward to shrink downstream waits.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{travel_cost, Instance, PenaltyMode, Scenario, ScenarioSet};
use crate::scenario::mean_scenario;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpModel {
    /// Deterministic model on the mean of the given scenarios.
    P0,
    /// Sampled model over every given scenario.
    P1,
}

impl FromStr for LpModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p0" => Ok(LpModel::P0),
            "p1" => Ok(LpModel::P1),
            other => Err(Error::InvalidConfig(format!("unknown model '{other}', expected p0 or p1"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpExportConfig {
    pub model: LpModel,
    /// Defaults to `L + horizon`, see [`lp_horizon`].
    pub big_m: Option<f64>,
}

impl LpExportConfig {
    pub fn new(model: LpModel) -> Self {
        LpExportConfig { model, big_m: None }
    }
}

/// Latest time any optimal solution needs: the sum of the largest service
/// times plus `n + 1` of the largest travel times.
pub fn lp_horizon(scenarios: &[Scenario]) -> f64 {
    let n = scenarios[0].service_time.len() - 1;
    let service: f64 = (1..=n)
        .map(|i| scenarios.iter().map(|s| s.service_time[i]).fold(0.0, f64::max))
        .sum();
    let travel = scenarios
        .iter()
        .flat_map(|s| s.travel_time.iter().flatten())
        .fold(0.0f64, |a, &b| a.max(b));
    service + (n + 1) as f64 * travel
}

struct Expr(Vec<(f64, String)>);

impl Expr {
    fn new() -> Self {
        Expr(Vec::new())
    }

    fn add(&mut self, coef: f64, var: impl Into<String>) -> &mut Self {
        self.0.push((coef, var.into()));
        self
    }

    fn render(&self) -> String {
        let mut out = String::new();
        for (i, (coef, var)) in self.0.iter().enumerate() {
            if i > 0 && i % 8 == 0 {
                out.push_str("\n  ");
            }
            let sign = if *coef < 0.0 { "-" } else { "+" };
            let mag = coef.abs();
            if i > 0 || *coef < 0.0 {
                out.push_str(sign);
                out.push(' ');
            }
            if mag != 1.0 {
                let _ = write!(out, "{mag} ");
            }
            out.push_str(var);
            out.push(' ');
        }
        out.trim_end().to_string()
    }
}

struct Model<'a> {
    instance: &'a Instance,
    scenarios: Vec<Scenario>,
    model: LpModel,
    big_m: f64,
    horizon: f64,
    n: usize,
    k: usize,
}

impl Model<'_> {
    fn x(&self, i: usize, j: usize, k: usize) -> String {
        format!("x_{i}_{j}_{k}")
    }

    fn valid_arc(&self, i: usize, j: usize) -> bool {
        i != j && i <= self.n && j >= 1
    }

    fn suffix(&self, m: usize) -> String {
        match self.model {
            LpModel::P0 => String::new(),
            LpModel::P1 => format!("_{}", m + 1),
        }
    }

    fn physical(&self, j: usize) -> usize {
        if j == self.n + 1 {
            0
        } else {
            j
        }
    }

    fn leg(&self, m: usize, i: usize, j: usize) -> f64 {
        let sc = &self.scenarios[m];
        sc.service_time[i] + sc.travel_time[i][self.physical(j)]
    }

    fn penalty_vars(&self) -> &'static [&'static str] {
        match self.instance.params.penalty_mode {
            PenaltyMode::Both => &["e", "d"],
            _ => &["w"],
        }
    }

    fn render(&self) -> Result<String> {
        let (n, k_count) = (self.n, self.k);
        let params = &self.instance.params;
        let m_count = self.scenarios.len();
        let big_m = self.big_m;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "\\ {} model: {n} clients, {k_count} caregivers, {m_count} scenarios, big-M {big_m}",
            match self.model {
                LpModel::P0 => "deterministic",
                LpModel::P1 => "sampled",
            }
        );

        out.push_str("Minimize\n obj: ");
        let mut obj = Expr::new();
        for k in 1..=k_count {
            for i in 0..=n {
                for j in 1..=n + 1 {
                    if !self.valid_arc(i, j) {
                        continue;
                    }
                    let mut coef = travel_cost(self.instance, i, self.physical(j))?;
                    if i == 0 && j <= n {
                        coef += params.c_fixed;
                    }
                    if coef != 0.0 {
                        obj.add(coef, self.x(i, j, k));
                    }
                }
            }
        }
        let scale = 1.0 / m_count as f64;
        for m in 0..m_count {
            let sfx = self.suffix(m);
            for i in 1..=n {
                match params.penalty_mode {
                    PenaltyMode::Both => {
                        obj.add(params.c_wait * scale, format!("e_{i}{sfx}"));
                        obj.add(params.c_tardy_extra * scale, format!("d_{i}{sfx}"));
                    }
                    _ => {
                        obj.add(params.c_wait * scale, format!("w_{i}{sfx}"));
                    }
                }
            }
            for k in 1..=k_count {
                obj.add(params.c_overtime * scale, format!("o_{k}{sfx}"));
            }
        }
        obj.0.retain(|(c, _)| *c != 0.0);
        out.push_str(&obj.render());
        out.push_str("\nSubject To\n");

        let mut row = |name: String, expr: &Expr, rel: &str, rhs: f64| {
            let _ = writeln!(out, " {name}: {} {rel} {rhs}", expr.render());
        };

        for i in 1..=n {
            let mut e = Expr::new();
            for k in 1..=k_count {
                for j in 1..=n + 1 {
                    if self.valid_arc(i, j) {
                        e.add(1.0, self.x(i, j, k));
                    }
                }
            }
            row(format!("serve_{i}"), &e, "=", 1.0);
        }
        for k in 1..=k_count {
            let mut e = Expr::new();
            for j in 1..=n + 1 {
                e.add(1.0, self.x(0, j, k));
            }
            row(format!("leave_{k}"), &e, "=", 1.0);
            let mut e = Expr::new();
            for i in 0..=n {
                e.add(1.0, self.x(i, n + 1, k));
            }
            row(format!("return_{k}"), &e, "=", 1.0);
        }
        for k in 1..=k_count {
            for i in 1..=n {
                let mut e = Expr::new();
                for j in 1..=n + 1 {
                    if self.valid_arc(i, j) {
                        e.add(1.0, self.x(i, j, k));
                    }
                }
                for j in 0..=n {
                    if self.valid_arc(j, i) {
                        e.add(-1.0, self.x(j, i, k));
                    }
                }
                row(format!("flow_{i}_{k}"), &e, "=", 0.0);
            }
        }

        // Schedule spacing on used arcs, tightest over scenarios.
        for i in 0..=n {
            for j in 1..=n {
                if !self.valid_arc(i, j) {
                    continue;
                }
                let leg = (0..m_count).map(|m| self.leg(m, i, j)).fold(f64::NEG_INFINITY, f64::max);
                let mut e = Expr::new();
                if i > 0 {
                    e.add(1.0, format!("s_{i}"));
                }
                e.add(-1.0, format!("s_{j}"));
                for k in 1..=k_count {
                    e.add(big_m, self.x(i, j, k));
                }
                row(format!("space_{i}_{j}"), &e, "<=", big_m - leg);
            }
        }

        for m in 0..m_count {
            let sfx = self.suffix(m);
            for i in 0..=n {
                for j in 1..=n {
                    if !self.valid_arc(i, j) {
                        continue;
                    }
                    let leg = self.leg(m, i, j);
                    for (tag, sign, rel, rhs) in [("up", 1.0, "<=", big_m + leg), ("lo", -1.0, ">=", leg - big_m)] {
                        let mut e = Expr::new();
                        e.add(1.0, format!("a_{j}{sfx}"));
                        if i > 0 {
                            e.add(-1.0, format!("b_{i}{sfx}"));
                        }
                        for k in 1..=k_count {
                            e.add(sign * big_m, self.x(i, j, k));
                        }
                        row(format!("arr_{tag}_{i}_{j}{sfx}"), &e, rel, rhs);
                    }
                }
            }
            for i in 1..=n {
                let (a, b, s) = (format!("a_{i}{sfx}"), format!("b_{i}{sfx}"), format!("s_{i}"));
                row(format!("begin_a_{i}{sfx}"), Expr::new().add(1.0, &b).add(-1.0, &a), ">=", 0.0);
                row(format!("begin_s_{i}{sfx}"), Expr::new().add(1.0, &b).add(-1.0, &s), ">=", 0.0);
                row(format!("begin_pin_{i}{sfx}"), Expr::new().add(1.0, &b).add(-1.0, &s), "<=", 0.0);
                let (early, late) = match params.penalty_mode {
                    PenaltyMode::Earliness => (Some(format!("w_{i}{sfx}")), None),
                    PenaltyMode::Tardiness => (None, Some(format!("w_{i}{sfx}"))),
                    PenaltyMode::Both => (Some(format!("e_{i}{sfx}")), Some(format!("d_{i}{sfx}"))),
                };
                if let Some(v) = early {
                    row(format!("early_{i}{sfx}"), Expr::new().add(1.0, &v).add(-1.0, &s).add(1.0, &a), ">=", 0.0);
                }
                if let Some(v) = late {
                    row(format!("late_{i}{sfx}"), Expr::new().add(1.0, &v).add(-1.0, &a).add(1.0, &s), ">=", 0.0);
                }
            }
            for i in 1..=n {
                let leg = self.leg(m, i, n + 1);
                for k in 1..=k_count {
                    let mut e = Expr::new();
                    e.add(1.0, format!("b_{i}{sfx}"));
                    e.add(-1.0, format!("o_{k}{sfx}"));
                    e.add(big_m, self.x(i, n + 1, k));
                    row(format!("over_{i}_{k}{sfx}"), &e, "<=", big_m + params.shift_length - leg);
                }
            }
        }

        out.push_str("Bounds\n");
        for k in 1..=k_count {
            for i in 0..=n + 1 {
                for j in 0..=n + 1 {
                    if !self.valid_arc(i, j) {
                        let _ = writeln!(out, " {} = 0", self.x(i, j, k));
                    }
                }
            }
        }
        let horizon = self.horizon;
        for i in 1..=n {
            let _ = writeln!(out, " 0 <= s_{i} <= {horizon}");
        }
        for m in 0..m_count {
            let sfx = self.suffix(m);
            for i in 1..=n {
                let _ = writeln!(out, " 0 <= a_{i}{sfx} <= {horizon}");
                let _ = writeln!(out, " 0 <= b_{i}{sfx} <= {horizon}");
                for v in self.penalty_vars() {
                    let _ = writeln!(out, " {v}_{i}{sfx} >= 0");
                }
            }
            for k in 1..=k_count {
                let _ = writeln!(out, " o_{k}{sfx} >= 0");
            }
        }

        out.push_str("Binaries\n");
        let mut line = Vec::new();
        for k in 1..=k_count {
            for i in 0..=n + 1 {
                for j in 0..=n + 1 {
                    line.push(self.x(i, j, k));
                    if line.len() == 10 {
                        let _ = writeln!(out, " {}", line.join(" "));
                        line.clear();
                    }
                }
            }
        }
        if !line.is_empty() {
            let _ = writeln!(out, " {}", line.join(" "));
        }
        out.push_str("End\n");
        Ok(out)
    }
}

/// Render the chosen model as CPLEX LP text.
pub fn export_lp(instance: &Instance, scenarios: &ScenarioSet, config: &LpExportConfig) -> Result<String> {
    scenarios.check_dimension(instance)?;
    let scenarios = match config.model {
        LpModel::P0 => vec![mean_scenario(scenarios)?],
        LpModel::P1 => scenarios.scenarios.clone(),
    };
    let horizon = lp_horizon(&scenarios);
    let longest_leg = scenarios
        .iter()
        .flat_map(|s| {
            let n = s.service_time.len();
            (0..n).flat_map(move |i| (0..n).map(move |j| s.service_time[i] + s.travel_time[i][j]))
        })
        .fold(0.0f64, f64::max);
    let big_m = config.big_m.unwrap_or(instance.params.shift_length + horizon);
    // Inactive rows must be slack for any time values in [0, horizon].
    let needed = horizon + longest_leg;
    if !(big_m >= needed) {
        return Err(Error::InvalidConfig(format!("big-M {big_m} is below the required bound {needed}")));
    }
    let model = Model {
        instance,
        n: instance.client_count(),
        k: instance.caregiver_count,
        scenarios,
        model: config.model,
        big_m,
        horizon,
    };
    model.render()
}

/// Render and write to `path`.
pub fn write_lp(instance: &Instance, scenarios: &ScenarioSet, config: &LpExportConfig, path: &Path) -> Result<()> {
    let text = export_lp(instance, scenarios, config)?;
    std::fs::write(path, text)?;
    Ok(())
}
