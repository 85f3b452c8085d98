use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::subset::Subset;

use super::partition::{Curve, IntervalPartition};

/// Slack used when intersecting α-ranges.
const RANGE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SubproblemResult {
    pub suggested: usize,
    pub interval: usize,
    /// Number of leading actions (in the interval's order) that are not inspected.
    pub k: usize,
    pub alpha: f64,
    pub p_i: f64,
    /// `α f(i)` plus expected inspection cost.
    pub objective: f64,
    pub feasible: bool,
}

/// Everything about one interval that does not depend on `k`.
pub(crate) struct IntervalContext<'a> {
    inst: &'a Instance,
    i: usize,
    interval: usize,
    lo: f64,
    hi: f64,
    pub order: Vec<usize>,
    curves: Vec<Option<Curve>>,
    /// `w[t] = v({order[t], ..})`, `w[len] = 0`.
    w: Vec<f64>,
    v_i: f64,
}

/// `C + f α + d/α` on `[lo, hi]`.
#[derive(Clone, Copy, Debug)]
struct Piece {
    lo: f64,
    hi: f64,
    c: f64,
    d: f64,
}

impl<'a> IntervalContext<'a> {
    pub fn new(inst: &'a Instance, part: &IntervalPartition, interval: usize) -> Self {
        let i = part.suggested;
        let (a0, a1) = part.interval(interval);
        let order = part.orders[interval].clone();
        let curves = order.iter().map(|&j| Curve::new(inst, i, j)).collect();
        let mut w = vec![0.0; order.len() + 1];
        let mut suffix: Subset = order.iter().copied().collect();
        for (t, &j) in order.iter().enumerate() {
            w[t] = inst.v(suffix);
            suffix = suffix.without(j);
        }
        IntervalContext {
            inst,
            i,
            interval,
            lo: a0.max(inst.c(i) / inst.f(i)),
            hi: a1,
            order,
            curves,
            w,
            v_i: inst.v(Subset::singleton(i)),
        }
    }

    fn infeasible(&self, k: usize) -> SubproblemResult {
        SubproblemResult {
            suggested: self.i,
            interval: self.interval,
            k,
            alpha: f64::NAN,
            p_i: f64::NAN,
            objective: f64::INFINITY,
            feasible: false,
        }
    }

    pub fn solve(&self, k: usize) -> SubproblemResult {
        let m = self.order.len();
        let fi = self.inst.f(self.i);
        let first_active = if k < m {
            match self.curves[k] {
                Some(c) => Some(c),
                None => return self.infeasible(k),
            }
        } else {
            None
        };

        let (mut lo, mut hi) = (self.lo, self.hi);
        if let Some(c) = first_active {
            // h(α) >= 0  <=>  a α + b >= 0
            if c.a > 0.0 {
                lo = lo.max(-c.b / c.a);
            } else if c.a < 0.0 {
                hi = hi.min(-c.b / c.a);
            } else if c.b < 0.0 {
                return self.infeasible(k);
            }
        }
        if lo > hi + RANGE_TOL {
            return self.infeasible(k);
        }
        hi = hi.max(lo);

        let (mut big_k, mut big_d) = (0.0, 0.0);
        for t in k..m {
            let c = self.curves[t].expect("active actions have positive success probability");
            let dw = self.w[t] - self.w[t + 1];
            big_k += c.a * dw;
            big_d += c.b * dw;
        }
        let gamma = self.v_i - self.w[k];

        let mut pieces = Vec::with_capacity(2);
        let zero = Piece { lo, hi, c: big_k, d: big_d };
        if gamma >= 0.0 {
            match k.checked_sub(1).and_then(|t| self.curves[t]) {
                None => pieces.push(zero),
                Some(c) => {
                    let shifted = |lo, hi| Piece { lo, hi, c: big_k + gamma * c.a, d: big_d + gamma * c.b };
                    if c.a == 0.0 {
                        pieces.push(if c.b > 0.0 { shifted(lo, hi) } else { zero });
                    } else {
                        let root = -c.b / c.a;
                        let (neg, pos) = if c.a > 0.0 {
                            ((lo, root.min(hi)), (root.max(lo), hi))
                        } else {
                            ((root.max(lo), hi), (lo, root.min(hi)))
                        };
                        if neg.0 <= neg.1 {
                            pieces.push(Piece { lo: neg.0, hi: neg.1, ..zero });
                        }
                        if pos.0 <= pos.1 {
                            pieces.push(shifted(pos.0, pos.1));
                        }
                    }
                }
            }
        } else {
            let (ca, cb) = first_active.map_or((1.0, 0.0), |c| (c.a, c.b));
            pieces.push(Piece { lo, hi, c: big_k + gamma * ca, d: big_d + gamma * cb });
        }

        let mut best: Option<(f64, f64)> = None;
        for p in &pieces {
            let mut cands = vec![p.lo, p.hi];
            if p.d > 0.0 {
                let s = (p.d / fi).sqrt();
                if s > p.lo && s < p.hi {
                    cands.push(s);
                }
            }
            for a in cands {
                let val = p.c + fi * a + p.d / a;
                let better = match best {
                    None => true,
                    Some((ba, bv)) => val < bv || (val == bv && a < ba),
                };
                if better {
                    best = Some((a, val));
                }
            }
        }
        let (alpha, objective) = best.expect("a feasible range yields at least one piece");
        let p_i = self.p_at(k, alpha, gamma);
        SubproblemResult {
            suggested: self.i,
            interval: self.interval,
            k,
            alpha,
            p_i,
            objective,
            feasible: true,
        }
    }

    /// Optimal `p_i` at a fixed payment, given the sign of its objective coefficient.
    fn p_at(&self, k: usize, alpha: f64, gamma: f64) -> f64 {
        let m = self.order.len();
        let p = if gamma >= 0.0 {
            k.checked_sub(1)
                .and_then(|t| self.curves[t])
                .map_or(0.0, |c| c.at(alpha).max(0.0))
        } else if k < m {
            self.curves[k].map_or(0.0, |c| c.at(alpha))
        } else {
            1.0
        };
        p.clamp(0.0, 1.0)
    }

    /// Marginals of the assembled scheme: `max(0, η - p_i)` on active actions, capped at `1 - p_i`.
    pub fn marginals(&self, k: usize, alpha: f64, p_i: f64) -> Vec<f64> {
        let mut q = vec![0.0; self.inst.n()];
        let room = (1.0 - p_i).max(0.0);
        for t in k..self.order.len() {
            if let Some(c) = self.curves[t] {
                let e = c.at(alpha) - p_i;
                q[self.order[t]] = if e < 1e-14 { 0.0 } else { e.min(room) };
            }
        }
        q
    }
}

/// Solves the two-variable program for interval `interval` and prefix length `k`.
pub fn solve_subproblem(
    inst: &Instance,
    partition: &IntervalPartition,
    interval: usize,
    k: usize,
) -> Result<SubproblemResult> {
    if interval >= partition.intervals() {
        return Err(Error::input(format!("interval {interval} out of range")));
    }
    if k >= inst.n() {
        return Err(Error::input(format!("k = {k} out of range")));
    }
    Ok(IntervalContext::new(inst, partition, interval).solve(k))
}
