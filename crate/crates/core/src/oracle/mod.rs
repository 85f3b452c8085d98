//! Brute-force reference solvers used to cross-check the fast solvers.
//!
//! Nothing here shares code with [`crate::det`] or [`crate::randomized`]
//! beyond the model semantics: the deterministic oracle enumerates every
//! inspected set, and the randomized oracle solves an explicit LP over all
//! distributions for each candidate payment.

pub mod simplex;

use serde::Serialize;

use crate::costfn::SetFunction;
use crate::error::{Error, Result};
use crate::model::{Instance, InspectionScheme, MarginalProfile};
use crate::par::{map_vec, Execution};
use crate::subset::Subset;

pub use simplex::{simplex_solve, Constraint, LinearProgram, LpSolution, LpStatus, Sense};

pub const MAX_DET_ACTIONS: usize = 12;
pub const MAX_MARGINAL_GROUND: usize = 10;
pub const MAX_RAND_ACTIONS: usize = 7;
/// The fixed-payment LP is allowed on larger instances, up to the simplex column limit.
pub const MAX_FIXED_ALPHA_ACTIONS: usize = 13;

const FEAS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub scheme: InspectionScheme,
    pub utility: f64,
}

/// Smallest payment in `[0, 1]` making `i` a best response when `set` is inspected
/// with probability one, if any.
pub fn least_payment(inst: &Instance, i: usize, set: Subset) -> Option<f64> {
    let (fi, ci) = (inst.f(i), inst.c(i));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for j in (0..inst.n()).filter(|&j| j != i) {
        let caught = set.contains(i) || set.contains(j);
        // α (f(i) - [not caught] f(j)) >= c(i) - c(j)
        let a = if caught { fi } else { fi - inst.f(j) };
        let b = ci - inst.c(j);
        if a > 0.0 {
            lo = lo.max(b / a);
        } else if a < 0.0 {
            hi = hi.min(b / a);
        } else if b > FEAS_TOL {
            return None;
        }
    }
    (lo <= hi + FEAS_TOL).then_some(lo.min(1.0))
}

/// Optimal deterministic IC scheme by enumerating every `(i, S)`.
pub fn brute_force_deterministic(inst: &Instance) -> Result<OracleResult> {
    let n = inst.n();
    if n > MAX_DET_ACTIONS {
        return Err(Error::SizeLimit(format!("deterministic oracle supports n <= {MAX_DET_ACTIONS}, got {n}")));
    }
    let mut best: Option<OracleResult> = None;
    for i in 0..n {
        for s in Subset::all(n) {
            let Some(alpha) = least_payment(inst, i, s) else { continue };
            let utility = (1.0 - alpha) * inst.f(i) - inst.v(s);
            if best.as_ref().is_none_or(|b| utility > b.utility) {
                best = Some(OracleResult { scheme: InspectionScheme::deterministic(i, alpha, s), utility });
            }
        }
    }
    Ok(best.expect("the null action with no payment is always IC"))
}

/// Best utility when nothing is ever inspected.
pub fn best_without_inspection(inst: &Instance) -> OracleResult {
    (0..inst.n())
        .filter_map(|i| {
            least_payment(inst, i, Subset::EMPTY).map(|alpha| OracleResult {
                scheme: InspectionScheme::deterministic(i, alpha, Subset::EMPTY),
                utility: (1.0 - alpha) * inst.f(i),
            })
        })
        .fold(None, |best: Option<OracleResult>, r| match best {
            Some(b) if b.utility >= r.utility => Some(b),
            _ => Some(r),
        })
        .expect("the null action with no payment is always IC")
}

/// Minimum-cost distribution over subsets of `ground` with the given marginals and mass, by LP.
pub fn lp_min_cost_given_marginals<F: SetFunction + ?Sized>(
    ground: Subset,
    marginals: &MarginalProfile,
    mass: f64,
    f: &F,
) -> Result<(Vec<(Subset, f64)>, f64)> {
    let g = ground.len();
    if g > MAX_MARGINAL_GROUND {
        return Err(Error::SizeLimit(format!("marginal LP supports |ground| <= {MAX_MARGINAL_GROUND}, got {g}")));
    }
    let sets: Vec<Subset> = ground.subsets().collect();
    let mut lp = LinearProgram::new(sets.iter().map(|&s| f.value(s)).collect());
    for j in ground.iter() {
        let row = sets.iter().map(|s| if s.contains(j) { 1.0 } else { 0.0 }).collect();
        lp.add(row, Sense::Eq, marginals.get(j));
    }
    lp.add(vec![1.0; sets.len()], Sense::Eq, mass);
    let sol = simplex_solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => {
            let dist = sets.into_iter().zip(sol.x).filter(|(_, p)| *p > 0.0).collect();
            Ok((dist, sol.value))
        }
        _ => Err(Error::Infeasible(format!("no distribution with mass {mass} realizes these marginals"))),
    }
}

/// LP optimum for a fixed suggested action and payment.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedAlphaLp {
    pub alpha: f64,
    pub p_i: f64,
    /// Inspection distribution, including `{i}` and `∅`, restricted to positive mass.
    pub distribution: Vec<(Subset, f64)>,
    pub inspection_cost: f64,
}

impl FixedAlphaLp {
    pub fn scheme(&self, i: usize) -> InspectionScheme {
        InspectionScheme::new(i, self.alpha, self.distribution.clone())
    }
}

/// The LP over all distributions for one suggested action; only the right-hand side depends on α.
struct ActionLp<'a> {
    inst: &'a Instance,
    i: usize,
    sets: Vec<Subset>,
    costs: Vec<f64>,
    /// Actions with positive success probability, one IC row each.
    watched: Vec<usize>,
}

impl<'a> ActionLp<'a> {
    fn new(inst: &'a Instance, i: usize) -> Self {
        let others = inst.all().without(i);
        let sets: Vec<Subset> = others.subsets().filter(|s| !s.is_empty()).collect();
        let mut costs: Vec<f64> = sets.iter().map(|&s| inst.v(s)).collect();
        costs.push(inst.v(Subset::singleton(i)));
        let watched = others.iter().filter(|&j| inst.f(j) > 0.0).collect();
        ActionLp { inst, i, sets, costs, watched }
    }

    fn solve(&self, alpha: f64) -> Result<Option<FixedAlphaLp>> {
        let (inst, i) = (self.inst, self.i);
        let (fi, ci) = (inst.f(i), inst.c(i));
        // deviations that can never be caught profitably: α f(i) - c(i) >= -c(j)
        if (0..inst.n()).any(|j| j != i && inst.f(j) == 0.0 && alpha * fi - ci < -inst.c(j) - FEAS_TOL) {
            return Ok(None);
        }
        let width = self.sets.len() + 1;
        let mut lp = LinearProgram::new(self.costs.clone());
        for &j in &self.watched {
            let mut row: Vec<f64> = self.sets.iter().map(|s| if s.contains(j) { 1.0 } else { 0.0 }).collect();
            row.push(1.0);
            let fj = inst.f(j);
            // α f(j) (p_i + p(j)) >= α f(j) - α f(i) + c(i) - c(j)
            let rhs = if alpha > 0.0 {
                1.0 - (alpha * fi - ci + inst.c(j)) / (alpha * fj)
            } else if ci - inst.c(j) > FEAS_TOL {
                return Ok(None);
            } else {
                continue;
            };
            lp.add(row, Sense::Ge, rhs);
        }
        lp.add(vec![1.0; width], Sense::Le, 1.0);
        let sol = simplex_solve(&lp)?;
        if sol.status != LpStatus::Optimal {
            return Ok(None);
        }
        let p_i = sol.x[width - 1];
        let mut distribution: Vec<(Subset, f64)> = Vec::new();
        if p_i > 0.0 {
            distribution.push((Subset::singleton(i), p_i));
        }
        distribution.extend(self.sets.iter().copied().zip(sol.x.iter().copied()).filter(|(_, p)| *p > 0.0));
        let rest = 1.0 - sol.x.iter().sum::<f64>();
        if rest > 0.0 {
            distribution.push((Subset::EMPTY, rest));
        }
        Ok(Some(FixedAlphaLp { alpha, p_i, distribution, inspection_cost: sol.value }))
    }

    /// `α f(i)` plus the LP cost, or `+∞` when infeasible.
    fn objective(&self, alpha: f64) -> Result<f64> {
        Ok(self.solve(alpha)?.map_or(f64::INFINITY, |s| alpha * self.inst.f(self.i) + s.inspection_cost))
    }
}

fn check_fixed_alpha_size(n: usize) -> Result<()> {
    if n > MAX_FIXED_ALPHA_ACTIONS {
        return Err(Error::SizeLimit(format!(
            "fixed-payment LP supports n <= {MAX_FIXED_ALPHA_ACTIONS}, got {n}"
        )));
    }
    Ok(())
}

/// Cheapest IC inspection distribution for suggesting `i` at payment `alpha`.
pub fn randomized_lp_at(inst: &Instance, i: usize, alpha: f64) -> Result<Option<FixedAlphaLp>> {
    check_fixed_alpha_size(inst.n())?;
    if i >= inst.n() || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::input(format!("need a valid action and alpha in [0, 1], got {i}, {alpha}")));
    }
    ActionLp::new(inst, i).solve(alpha)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSearch {
    pub alpha_resolution: f64,
    pub lp_solves: usize,
}

#[derive(Clone, Debug)]
pub struct RandOracleResult {
    pub scheme: InspectionScheme,
    pub utility: f64,
    pub p_i: f64,
    pub search: OracleSearch,
}

/// Candidate payments for suggesting `i`: the interval ends, critical payments,
/// pairwise crossings, a uniform grid, and any extra hints.
fn alpha_candidates(inst: &Instance, i: usize, resolution: f64, hints: &[f64]) -> Vec<f64> {
    let (fi, ci) = (inst.f(i), inst.c(i));
    let base = ci / fi;
    let mut out = vec![base, 1.0];
    for j in (0..inst.n()).filter(|&j| j != i) {
        let (fj, cj) = (inst.f(j), inst.c(j));
        if fj != fi {
            out.push((ci - cj) / (fi - fj));
        }
        for jp in (j + 1..inst.n()).filter(|&jp| jp != i) {
            let (fjp, cjp) = (inst.f(jp), inst.c(jp));
            if fj > 0.0 && fjp > 0.0 && fj != fjp {
                out.push(((ci - cj) * fjp - (ci - cjp) * fj) / ((fjp - fj) * fi));
            }
        }
    }
    let steps = ((1.0 - base) / resolution).ceil() as usize;
    out.extend((1..steps).map(|t| base + t as f64 * resolution));
    out.extend_from_slice(hints);
    out.retain(|a| a.is_finite() && *a >= base && *a <= 1.0);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    out
}

const GOLDEN_MAX_STEPS: usize = 200;

/// Golden-section search for the minimum of `g` on `[lo, hi]`, to relative width `tol`.
fn golden_min<G: FnMut(f64) -> Result<f64>>(mut g: G, mut lo: f64, mut hi: f64, tol: f64, evals: &mut usize) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut g1, mut g2) = (g(x1)?, g(x2)?);
    *evals += 2;
    for _ in 0..GOLDEN_MAX_STEPS {
        if hi - lo <= tol * hi.abs().max(1.0) {
            break;
        }
        if g1 <= g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - r * (hi - lo);
            g1 = g(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + r * (hi - lo);
            g2 = g(x2)?;
        }
        *evals += 1;
    }
    Ok(if g1 <= g2 { (x1, g1) } else { (x2, g2) })
}

/// Optimal randomized IC scheme by LP over all distributions, searching the payment.
///
/// The LP cost is convex in `1/α` (its right-hand side is affine in `1/α`),
/// and so is `α f(i)`. After a scan over [`alpha_candidates`], a golden-section
/// search in `1/α` between the neighbors of the best candidate refines the optimum.
pub fn brute_force_randomized(inst: &Instance, alpha_resolution: f64) -> Result<RandOracleResult> {
    brute_force_randomized_with(inst, alpha_resolution, &[], Execution::default())
}

pub fn brute_force_randomized_with(
    inst: &Instance,
    alpha_resolution: f64,
    hints: &[f64],
    exec: Execution,
) -> Result<RandOracleResult> {
    let n = inst.n();
    if n > MAX_RAND_ACTIONS {
        return Err(Error::SizeLimit(format!("randomized oracle supports n <= {MAX_RAND_ACTIONS}, got {n}")));
    }
    if !(alpha_resolution > 0.0 && alpha_resolution <= 1.0) {
        return Err(Error::input(format!("alpha resolution must be in (0, 1], got {alpha_resolution}")));
    }
    let per_action = map_vec(exec, (0..n).collect(), |i| best_for_action(inst, i, alpha_resolution, hints));
    let mut best: Option<(RandOracleResult, usize)> = None;
    let mut lp_solves = 0;
    for r in per_action {
        let Some((res, solves)) = r? else { continue };
        lp_solves += solves;
        if best.as_ref().is_none_or(|(b, _)| res.utility > b.utility) {
            best = Some((res, solves));
        }
    }
    let (mut res, _) = best.expect("a zero-cost action is always available");
    res.search = OracleSearch { alpha_resolution, lp_solves };
    Ok(res)
}

/// Payments below this are not refined further.
const MIN_ALPHA: f64 = 1e-9;

fn best_for_action(inst: &Instance, i: usize, resolution: f64, hints: &[f64]) -> Result<Option<(RandOracleResult, usize)>> {
    let (fi, ci) = (inst.f(i), inst.c(i));
    let search = OracleSearch { alpha_resolution: resolution, lp_solves: 0 };
    if ci == 0.0 {
        return Ok(Some((
            RandOracleResult {
                scheme: InspectionScheme::deterministic(i, 0.0, Subset::EMPTY),
                utility: fi,
                p_i: 0.0,
                search,
            },
            0,
        )));
    }
    if fi <= 0.0 || ci > fi {
        return Ok(None);
    }
    let lp = ActionLp::new(inst, i);
    let cands = alpha_candidates(inst, i, resolution, hints);
    let mut solves = 0;
    let mut vals = Vec::with_capacity(cands.len());
    for &a in &cands {
        vals.push(lp.objective(a)?);
        solves += 1;
    }
    let Some(b) = (0..cands.len()).filter(|&t| vals[t].is_finite()).min_by(|&x, &y| vals[x].total_cmp(&vals[y])) else {
        return Ok(None);
    };
    let (mut alpha, mut val) = (cands[b], vals[b]);
    let left = cands[b.saturating_sub(1)];
    let right = cands[(b + 1).min(cands.len() - 1)];
    if right > left {
        let (u, g) = golden_min(
            |u| lp.objective(1.0 / u),
            1.0 / right,
            1.0 / left.max(MIN_ALPHA),
            1e-12,
            &mut solves,
        )?;
        if g < val {
            alpha = 1.0 / u;
            val = g;
        }
    }
    let sol = lp.solve(alpha)?.ok_or_else(|| Error::Invariant("oracle optimum became infeasible".into()))?;
    solves += 1;
    Ok(Some((
        RandOracleResult {
            scheme: sol.scheme(i),
            utility: fi - val,
            p_i: sol.p_i,
            search,
        },
        solves,
    )))
}
