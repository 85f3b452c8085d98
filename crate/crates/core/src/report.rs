//! Solve reports: the winning scheme with its objective decomposition,
//! provenance and oracle query counts.

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::costfn::CountingOracle;
use crate::det::solve_deterministic_with;
use crate::error::{Error, Result};
use crate::io::{instance_digest, SchemeJson};
use crate::model::{expected_inspection_cost, Instance, InspectionScheme};
use crate::par::Execution;
use crate::randomized::{solve_randomized_with, RandOptions, Submodularity};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Slack allowed between the reported utility and its decomposition.
pub const DECOMPOSITION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Det,
    Rand,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub success_prob: f64,
    /// `α f(i)`.
    pub payment: f64,
    pub inspection_cost: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QueryCounts {
    pub value: u64,
    pub demand: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub tool_version: &'static str,
    pub instance_digest: String,
    pub mode: Mode,
    pub scheme: SchemeJson,
    pub utility: f64,
    pub decomposition: Decomposition,
    pub provenance: Value,
    pub queries: QueryCounts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub submodularity: Option<Submodularity>,
    /// Candidate table (det) or feasible subproblems (rand).
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub exec: Execution,
    pub verify_submodular: bool,
    pub timing: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { exec: Execution::default(), verify_submodular: true, timing: false }
    }
}

pub fn decompose(inst: &Instance, scheme: &InspectionScheme) -> Decomposition {
    let f = inst.f(scheme.suggested);
    Decomposition {
        success_prob: f,
        payment: scheme.alpha * f,
        inspection_cost: expected_inspection_cost(inst, scheme),
    }
}

#[derive(Serialize)]
struct DetRow<'a> {
    suggested: &'a str,
    alpha: f64,
    inspected: Vec<String>,
    utility: f64,
    provenance: crate::det::Provenance,
}

#[derive(Serialize)]
struct RandRow<'a> {
    suggested: &'a str,
    interval: usize,
    k: usize,
    alpha: f64,
    p_i: f64,
    objective: f64,
}

/// Runs a solver on `inst` behind a counting oracle and assembles the report.
pub fn solve_report(inst: &Instance, mode: Mode, opts: SolveOptions) -> Result<SolveReport> {
    let counter = Arc::new(CountingOracle::new(inst.cost_fn().clone()));
    let counted = inst.with_cost_fn(counter.clone())?;
    let (v0, d0) = (counter.value_queries(), counter.demand_queries());
    let start = Instant::now();

    let (scheme, utility, provenance, submodularity, details) = match mode {
        Mode::Det => {
            let sol = solve_deterministic_with(&counted, opts.exec)?;
            let rows: Vec<DetRow> = sol
                .candidates
                .iter()
                .map(|c| DetRow {
                    suggested: inst.id(c.suggested),
                    alpha: c.alpha,
                    inspected: inst.ids_of(c.inspected),
                    utility: c.utility,
                    provenance: c.provenance,
                })
                .collect();
            let scheme = sol.scheme();
            (scheme, sol.best.utility, serde_json::to_value(sol.best.provenance)?, None, serde_json::to_value(rows)?)
        }
        Mode::Rand => {
            let sol = solve_randomized_with(
                &counted,
                RandOptions { exec: opts.exec, verify_submodular: opts.verify_submodular },
            )?;
            let rows: Vec<RandRow> = sol
                .subproblems
                .iter()
                .map(|r| RandRow {
                    suggested: inst.id(r.suggested),
                    interval: r.interval,
                    k: r.k,
                    alpha: r.alpha,
                    p_i: r.p_i,
                    objective: r.objective,
                })
                .collect();
            let mut prov = serde_json::to_value(sol.provenance)?;
            if let Value::Object(map) = &mut prov {
                map.insert("p_i".into(), sol.p_i.into());
            }
            (sol.scheme, sol.utility, prov, Some(sol.submodularity), serde_json::to_value(rows)?)
        }
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let queries = QueryCounts {
        value: counter.value_queries() - v0,
        demand: counter.demand_queries() - d0,
    };

    let decomposition = decompose(inst, &scheme);
    let implied = decomposition.success_prob - decomposition.payment - decomposition.inspection_cost;
    if (implied - utility).abs() > DECOMPOSITION_TOL {
        return Err(Error::Invariant(format!(
            "utility {utility} does not match its decomposition {implied}"
        )));
    }
    Ok(SolveReport {
        tool_version: TOOL_VERSION,
        instance_digest: instance_digest(inst)?,
        mode,
        scheme: SchemeJson::from_scheme(inst, &scheme),
        utility,
        decomposition,
        provenance,
        queries,
        submodularity,
        details,
        wall_clock_ms: opts.timing.then_some(elapsed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hard::intro_instance;

    #[test]
    fn det_report_counts_queries() {
        let inst = intro_instance();
        let r = solve_report(&inst, Mode::Det, SolveOptions::default()).unwrap();
        assert!((r.utility - 0.55).abs() < 1e-12);
        assert!(r.queries.value <= 9);
        assert!(r.wall_clock_ms.is_none());
        assert_eq!(r.scheme.suggested, "g");
    }

    #[test]
    fn reports_are_reproducible() {
        let inst = intro_instance();
        let a = serde_json::to_string(&solve_report(&inst, Mode::Rand, SolveOptions::default()).unwrap()).unwrap();
        let b = serde_json::to_string(&solve_report(&inst, Mode::Rand, SolveOptions::default()).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
