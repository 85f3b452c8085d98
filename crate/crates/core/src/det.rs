//! Optimal deterministic incentive-compatible inspection schemes.
//!
//! For a suggested action `i` with `f(i) > c(i) > 0` the optimal payment is
//! either `c(i)/f(i)` or a critical payment `(c(i)-c(j))/(f(i)-f(j))` at which
//! the agent is indifferent between `i` and some cheaper-to-succeed `j`. At
//! each such payment the set that must be inspected is exactly the set of
//! actions the agent would strictly prefer, so only `n + 1` candidates per
//! suggestion need to be priced. Any monotone cost function is supported.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{is_ic, Instance, InspectionScheme};
use crate::par::{map_range, Execution};
use crate::subset::Subset;

/// Slack used for the strict inequalities that define the candidate sets.
pub const STRICT_TOL: f64 = 1e-12;

/// IC tolerance applied to the returned scheme.
pub const IC_TOL: f64 = 1e-9;

#[inline]
fn strictly_greater(a: f64, b: f64) -> bool {
    a > b + STRICT_TOL
}

/// Which rule produced a deterministic candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Provenance {
    /// `(i*, 0, ∅)` for the zero-cost action with the highest success probability.
    ZeroCost,
    /// `(i, c(i)/f(i), {i})`.
    SelfInspect,
    /// `(i, c(i)/f(i), S_i)`.
    FullSet,
    /// `(i, crit(i, j), S_{i,j})`.
    PairSet { j: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetCandidate {
    pub suggested: usize,
    pub alpha: f64,
    pub inspected: Subset,
    pub utility: f64,
    pub provenance: Provenance,
}

impl DetCandidate {
    pub fn scheme(&self) -> InspectionScheme {
        InspectionScheme::deterministic(self.suggested, self.alpha, self.inspected)
    }

    /// Ranking used to pick the optimum: higher utility, then smaller set, then smaller α.
    fn beats(&self, other: &DetCandidate) -> bool {
        if (self.utility - other.utility).abs() > STRICT_TOL {
            return self.utility > other.utility;
        }
        if self.inspected.len() != other.inspected.len() {
            return self.inspected.len() < other.inspected.len();
        }
        self.alpha < other.alpha
    }
}

/// The sets `A_i`, `S_i` and `S_{i,j}` for one suggested action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSets {
    /// Actions with lower success probability that the agent strictly prefers at `α = c(i)/f(i)`.
    pub lower: Subset,
    /// Everything that must be inspected at `α = c(i)/f(i)` when `i` is not.
    pub full: Subset,
    /// For each `j` in `lower`, everything that must be inspected at `α = crit(i, j)`.
    pub pairs: Vec<(usize, Subset)>,
}

/// Payment at which the agent is indifferent between `i` and `j`.
pub fn critical_payment(inst: &Instance, i: usize, j: usize) -> f64 {
    (inst.c(i) - inst.c(j)) / (inst.f(i) - inst.f(j))
}

pub fn candidate_sets(inst: &Instance, i: usize) -> Result<CandidateSets> {
    let (fi, ci) = (inst.f(i), inst.c(i));
    if !(fi > ci && ci > 0.0) {
        return Err(Error::input(format!(
            "candidate sets need f(i) > c(i) > 0, got f = {fi}, c = {ci} for {:?}",
            inst.id(i)
        )));
    }
    let base = ci / fi;
    let others = || (0..inst.n()).filter(move |&j| j != i);

    let lower: Subset = others()
        .filter(|&j| inst.f(j) < fi && strictly_greater(critical_payment(inst, i, j), base))
        .collect();
    let upper_at_base: Subset = others()
        .filter(|&j| inst.f(j) >= fi && strictly_greater(inst.f(j) * base, inst.c(j)))
        .collect();
    let full = lower.union(upper_at_base);

    let pairs = lower
        .iter()
        .map(|j| {
            let alpha = critical_payment(inst, i, j);
            let from_lower = lower
                .iter()
                .filter(|&k| strictly_greater(critical_payment(inst, i, k), alpha));
            let from_upper = others().filter(|&k| {
                inst.f(k) >= fi && strictly_greater(alpha * (inst.f(k) - fi), inst.c(k) - ci)
            });
            (j, from_lower.chain(from_upper).collect())
        })
        .collect();

    Ok(CandidateSets { lower, full, pairs })
}

/// All candidates for a suggested action with `f(i) > c(i) > 0`.
fn candidates_for(inst: &Instance, i: usize) -> Result<Vec<DetCandidate>> {
    let sets = candidate_sets(inst, i)?;
    let fi = inst.f(i);
    let base = inst.c(i) / fi;
    let make = |alpha: f64, inspected: Subset, provenance| DetCandidate {
        suggested: i,
        alpha,
        inspected,
        utility: (1.0 - alpha) * fi - inst.v(inspected),
        provenance,
    };
    let mut out = Vec::with_capacity(sets.pairs.len() + 2);
    out.push(make(base, Subset::singleton(i), Provenance::SelfInspect));
    out.push(make(base, sets.full, Provenance::FullSet));
    for (j, s) in sets.pairs {
        let alpha = critical_payment(inst, i, j);
        // payments above 1 are not contracts; they would lose money anyway
        if alpha <= 1.0 {
            out.push(make(alpha, s, Provenance::PairSet { j }));
        }
    }
    Ok(out)
}

fn zero_cost_candidate(inst: &Instance) -> DetCandidate {
    let best = (0..inst.n())
        .filter(|&j| inst.c(j) == 0.0)
        .fold(None, |acc: Option<usize>, j| match acc {
            Some(b) if inst.f(b) >= inst.f(j) => Some(b),
            _ => Some(j),
        })
        .expect("the null action has zero cost");
    DetCandidate {
        suggested: best,
        alpha: 0.0,
        inspected: Subset::EMPTY,
        utility: inst.f(best),
        provenance: Provenance::ZeroCost,
    }
}

#[derive(Clone, Debug)]
pub struct DetSolution {
    pub best: DetCandidate,
    pub candidates: Vec<DetCandidate>,
}

impl DetSolution {
    pub fn scheme(&self) -> InspectionScheme {
        self.best.scheme()
    }
}

pub fn solve_deterministic(inst: &Instance) -> Result<DetSolution> {
    solve_deterministic_with(inst, Execution::default())
}

pub fn solve_deterministic_with(inst: &Instance, exec: Execution) -> Result<DetSolution> {
    let per_action = map_range(exec, inst.n(), |i| {
        let (fi, ci) = (inst.f(i), inst.c(i));
        if fi > ci && ci > 0.0 {
            candidates_for(inst, i)
        } else {
            Ok(Vec::new())
        }
    });
    let mut candidates = vec![zero_cost_candidate(inst)];
    for c in per_action {
        candidates.extend(c?);
    }
    let best = candidates
        .iter()
        .skip(1)
        .fold(&candidates[0], |best, c| if c.beats(best) { c } else { best })
        .clone();
    if !is_ic(inst, &best.scheme(), IC_TOL) {
        return Err(Error::Invariant(format!(
            "deterministic optimum {best:?} is not incentive compatible"
        )));
    }
    Ok(DetSolution { best, candidates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hard::{gap_instance, intro_instance};

    #[test]
    fn intro_candidate_sets() {
        let inst = intro_instance();
        let g = inst.index_of("g").unwrap();
        let b = inst.index_of("b").unwrap();
        let bot = inst.index_of("bot").unwrap();
        let sets = candidate_sets(&inst, g).unwrap();
        assert_eq!(sets.lower, Subset::from_iter([bot, b]));
        assert_eq!(sets.full, Subset::from_iter([bot, b]));
        let pair = |j| sets.pairs.iter().find(|(k, _)| *k == j).unwrap().1;
        assert_eq!(pair(b), Subset::EMPTY);
        assert_eq!(pair(bot), Subset::singleton(b));
    }

    #[test]
    fn intro_deterministic_optimum() {
        let inst = intro_instance();
        let sol = solve_deterministic(&inst).unwrap();
        assert_eq!(inst.id(sol.best.suggested), "g");
        assert!((sol.best.alpha - 7.0 / 20.0).abs() < 1e-15);
        assert_eq!(sol.best.inspected, Subset::singleton(inst.index_of("g").unwrap()));
        assert!((sol.best.utility - 11.0 / 20.0).abs() < 1e-12);
        assert_eq!(sol.best.provenance, Provenance::SelfInspect);
        for c in &sol.candidates {
            assert!(is_ic(&inst, &c.scheme(), 1e-12), "{c:?}");
        }
    }

    #[test]
    fn no_lower_actions_means_empty_sets() {
        use crate::costfn::CostSpec;
        use crate::model::{cost_handle, Action};
        let actions = vec![
            Action::new("bot", 0.0, 0.9),
            Action::new("a", 0.2, 0.5),
            Action::new("hi", 0.9, 0.95),
        ];
        let inst = Instance::new(actions, "bot", cost_handle(CostSpec::Additive { weights: vec![1.0; 3] })).unwrap();
        // bot has f >= f(a) and c/f = 0 < c(a)/f(a); hi has c/f above too
        let sets = candidate_sets(&inst, 1).unwrap();
        assert_eq!(sets.lower, Subset::EMPTY);
        assert_eq!(sets.full, Subset::singleton(0));
    }

    #[test]
    fn single_zero_cost_action() {
        use crate::costfn::CostSpec;
        use crate::model::{cost_handle, Action};
        let actions = vec![Action::new("bot", 0.0, 0.0), Action::new("a", 0.0, 0.7)];
        let inst = Instance::new(actions, "bot", cost_handle(CostSpec::Additive { weights: vec![5.0, 5.0] })).unwrap();
        let sol = solve_deterministic(&inst).unwrap();
        assert_eq!(sol.best.suggested, 1);
        assert_eq!(sol.best.alpha, 0.0);
        assert_eq!(sol.best.inspected, Subset::EMPTY);
        assert_eq!(sol.best.utility, 0.7);
    }

    #[test]
    fn precondition_is_enforced() {
        let inst = intro_instance();
        assert!(candidate_sets(&inst, inst.null_index()).is_err());
    }

    #[test]
    fn gap_instance_deterministic_value() {
        let inst = gap_instance(10).unwrap();
        let sol = solve_deterministic(&inst).unwrap();
        assert!(sol.best.utility <= 2.0 / 1024.0 + 1e-15);
        assert!((sol.best.utility - 2.0 / 1024.0).abs() < 1e-12);
    }
}
