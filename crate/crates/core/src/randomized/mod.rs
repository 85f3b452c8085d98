//! Optimal randomized incentive-compatible inspection schemes for submodular costs.
//!
//! For a suggested action `i`, `[0, 1]` is cut at the payments where two
//! `η` curves cross. On each interval the `η` order is fixed, and choosing how
//! many of the lowest-`η` actions go uninspected (`k`) leaves a program in
//! `(α, p_i)` whose optimum is found in closed form. The winning marginals are
//! realized by a nested distribution, which is cost-minimal for submodular
//! costs, so the scheme is supported on at most `n + 1` sets.

mod nested;
mod partition;
mod subproblem;

use serde::Serialize;

pub use nested::{nested_min_cost_distribution, NestedDistribution};
pub use partition::{breakpoints, eta, pair_breakpoint, IntervalPartition};
pub use subproblem::{solve_subproblem, SubproblemResult};

use crate::costfn::checks::{check_submodular, CheckMode};
use crate::error::{Error, Result};
use crate::model::{is_ic, principal_utility, Instance, InspectionScheme, MarginalProfile};
use crate::par::{map_vec, Execution};
use crate::subset::Subset;

use subproblem::IntervalContext;

/// IC tolerance applied to assembled schemes.
pub const IC_TOL: f64 = 1e-9;

/// Largest instance on which submodularity is verified by enumeration.
pub const VERIFY_LIMIT: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Submodularity {
    Verified,
    /// Too large to check; the input was trusted.
    Unverified,
    /// The caller asked to skip the check.
    Skipped,
}

#[derive(Clone, Copy, Debug)]
pub struct RandOptions {
    pub exec: Execution,
    pub verify_submodular: bool,
}

impl Default for RandOptions {
    fn default() -> Self {
        RandOptions { exec: Execution::default(), verify_submodular: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RandProvenance {
    /// `(i, 0, {∅: 1})` for a zero-cost action.
    ZeroCost,
    Subproblem { interval: usize, k: usize },
}

#[derive(Clone, Debug)]
pub struct RandSolution {
    pub scheme: InspectionScheme,
    pub utility: f64,
    pub p_i: f64,
    pub provenance: RandProvenance,
    pub submodularity: Submodularity,
    /// Every feasible subproblem optimum, in `(i, interval, k)` order.
    pub subproblems: Vec<SubproblemResult>,
}

/// Best scheme for one suggested action.
#[derive(Clone, Debug)]
struct ActionBest {
    scheme: InspectionScheme,
    utility: f64,
    p_i: f64,
    provenance: RandProvenance,
}

/// Builds the scheme for a solved subproblem: `{i}` with probability `p_i`
/// plus the nested distribution of the remaining mass.
pub fn assemble_scheme(inst: &Instance, partition: &IntervalPartition, result: &SubproblemResult) -> Result<InspectionScheme> {
    if !result.feasible {
        return Err(Error::input("cannot assemble an infeasible subproblem"));
    }
    let ctx = IntervalContext::new(inst, partition, result.interval);
    assemble(inst, &ctx, result)
}

fn assemble(inst: &Instance, ctx: &IntervalContext<'_>, result: &SubproblemResult) -> Result<InspectionScheme> {
    let i = result.suggested;
    let q = ctx.marginals(result.k, result.alpha, result.p_i);
    let ground = inst.all().without(i);
    let nested = nested_min_cost_distribution(ground, &MarginalProfile::new(q)?, 1.0 - result.p_i, inst.cost_fn())?;
    let mut distribution = Vec::with_capacity(nested.levels.len() + 2);
    if result.p_i > 0.0 {
        distribution.push((Subset::singleton(i), result.p_i));
    }
    distribution.extend(nested.into_distribution());
    let scheme = InspectionScheme::new(i, result.alpha, distribution);
    if !is_ic(inst, &scheme, IC_TOL) {
        return Err(Error::Invariant(format!("assembled scheme {scheme:?} is not incentive compatible")));
    }
    Ok(scheme)
}

fn better(a: &ActionBest, b: &ActionBest) -> bool {
    if a.utility != b.utility {
        return a.utility > b.utility;
    }
    if a.scheme.suggested != b.scheme.suggested {
        return a.scheme.suggested < b.scheme.suggested;
    }
    a.scheme.alpha < b.scheme.alpha
}

fn solve_interval(inst: &Instance, part: &IntervalPartition, l: usize) -> Result<(Option<ActionBest>, Vec<SubproblemResult>)> {
    let ctx = IntervalContext::new(inst, part, l);
    let results: Vec<SubproblemResult> = (0..inst.n()).map(|k| ctx.solve(k)).filter(|r| r.feasible).collect();
    let winner = results.iter().fold(None, |best: Option<&SubproblemResult>, r| match best {
        Some(b) if b.objective < r.objective || (b.objective == r.objective && b.alpha <= r.alpha) => Some(b),
        _ => Some(r),
    });
    let best = match winner {
        None => None,
        Some(r) => {
            let scheme = assemble(inst, &ctx, r)?;
            let utility = principal_utility(inst, &scheme, r.suggested);
            Some(ActionBest {
                scheme,
                utility,
                p_i: r.p_i,
                provenance: RandProvenance::Subproblem { interval: r.interval, k: r.k },
            })
        }
    };
    Ok((best, results))
}

pub fn solve_randomized(inst: &Instance) -> Result<RandSolution> {
    solve_randomized_with(inst, RandOptions::default())
}

pub fn solve_randomized_with(inst: &Instance, opts: RandOptions) -> Result<RandSolution> {
    let submodularity = if !opts.verify_submodular {
        Submodularity::Skipped
    } else if inst.n() > VERIFY_LIMIT {
        Submodularity::Unverified
    } else {
        let out = check_submodular(inst.cost_fn(), CheckMode::Exhaustive)?;
        if let Some(w) = out.witness {
            return Err(Error::ClassCheck { class: "submodular", detail: format!("{w:?}") });
        }
        Submodularity::Verified
    };

    let mut tasks = Vec::new();
    let mut partitions = Vec::new();
    let mut fallback: Vec<ActionBest> = Vec::new();
    for i in 0..inst.n() {
        let (fi, ci) = (inst.f(i), inst.c(i));
        if ci == 0.0 {
            fallback.push(ActionBest {
                scheme: InspectionScheme::deterministic(i, 0.0, Subset::EMPTY),
                utility: fi,
                p_i: 0.0,
                provenance: RandProvenance::ZeroCost,
            });
        } else if fi > ci {
            let part = breakpoints(inst, i)?;
            partitions.push(part);
        }
    }
    for (x, part) in partitions.iter().enumerate() {
        tasks.extend((0..part.intervals()).map(|l| (x, l)));
    }

    let outcomes = map_vec(opts.exec, tasks, |(x, l)| solve_interval(inst, &partitions[x], l));
    let mut candidates = fallback;
    let mut subproblems = Vec::new();
    for o in outcomes {
        let (best, results) = o?;
        candidates.extend(best);
        subproblems.extend(results);
    }
    subproblems.sort_by_key(|r| (r.suggested, r.interval, r.k));

    let best = candidates
        .into_iter()
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .expect("the null action has zero cost");
    Ok(RandSolution {
        scheme: best.scheme,
        utility: best.utility,
        p_i: best.p_i,
        provenance: best.provenance,
        submodularity,
        subproblems,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hard::{gap_instance, intro_instance, nonic_instance};
    use crate::model::marginal;

    #[test]
    fn intro_randomized_optimum() {
        let inst = intro_instance();
        let sol = solve_randomized(&inst).unwrap();
        let g = inst.index_of("g").unwrap();
        assert_eq!(sol.scheme.suggested, g);
        assert!((sol.scheme.alpha - 0.375).abs() < 1e-12);
        assert!((sol.p_i - 1.0 / 3.0).abs() < 1e-12);
        assert!((sol.utility - 71.0 / 120.0).abs() < 1e-12);
        assert!(sol.scheme.support_size() <= inst.n() + 1);
        assert!((marginal(&sol.scheme, g) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(sol.submodularity, Submodularity::Verified);
    }

    #[test]
    fn nonic_instance_optimum() {
        let (inst, _) = nonic_instance();
        let sol = solve_randomized(&inst).unwrap();
        let expected = 1.45 - 2.0 * 0.3f64.sqrt();
        assert!((sol.utility - expected).abs() < 1e-12, "{}", sol.utility);
        assert!((sol.scheme.alpha - 0.3f64.sqrt()).abs() < 1e-9);
        assert_eq!(sol.p_i, 0.0);
    }

    #[test]
    fn gap_instance_beats_reference() {
        let inst = gap_instance(10).unwrap();
        let sol = solve_randomized(&inst).unwrap();
        assert!(sol.utility >= 10.0 / 2048.0 - 1e-12);
    }

    #[test]
    fn subproblem_reports_infeasible_ranges() {
        let inst = intro_instance();
        let g = inst.index_of("g").unwrap();
        let part = breakpoints(&inst, g).unwrap();
        // on [0, 0.375] the agent prefers g only for α >= 0.35; k = 0 needs η of the first action >= 0
        let r = solve_subproblem(&inst, &part, 0, 0).unwrap();
        assert!(r.feasible);
        assert!(r.alpha >= 0.35 - 1e-15 && r.alpha <= 0.375 + 1e-15);
        assert!(solve_subproblem(&inst, &part, 5, 0).is_err());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let inst = intro_instance();
        let a = solve_randomized_with(&inst, RandOptions { exec: Execution::Sequential, verify_submodular: false }).unwrap();
        let b = solve_randomized_with(&inst, RandOptions { exec: Execution::Parallel, verify_submodular: false }).unwrap();
        assert_eq!(a.scheme, b.scheme);
        assert_eq!(a.subproblems, b.subproblems);
        assert_eq!(a.submodularity, Submodularity::Skipped);
    }
}
