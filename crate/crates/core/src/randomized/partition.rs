use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Instance;

/// Breakpoints closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-12;

/// `η_j(α, p_i) = 1 - p_i - (α f(i) - c(i) + c(j)) / (α f(j))`: the least
/// marginal inspection probability on `j` that keeps `i` weakly preferred.
pub fn eta(inst: &Instance, i: usize, j: usize, alpha: f64, p_i: f64) -> Result<f64> {
    if inst.f(j) <= 0.0 {
        return Err(Error::Domain(format!("eta is undefined for {:?} with f = 0", inst.id(j))));
    }
    if alpha <= 0.0 {
        return Err(Error::Domain(format!("eta needs alpha > 0, got {alpha}")));
    }
    Ok(1.0 - p_i - (alpha * inst.f(i) - inst.c(i) + inst.c(j)) / (alpha * inst.f(j)))
}

/// `h_j(α) = a + b/α`, the value of `p_i` at which `η_j` vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Curve {
    pub a: f64,
    pub b: f64,
}

impl Curve {
    pub fn new(inst: &Instance, i: usize, j: usize) -> Option<Curve> {
        let fj = inst.f(j);
        (fj > 0.0).then(|| Curve { a: 1.0 - inst.f(i) / fj, b: (inst.c(i) - inst.c(j)) / fj })
    }

    #[inline]
    pub fn at(self, alpha: f64) -> f64 {
        self.a + self.b / alpha
    }
}

/// Payment at which `η_j` and `η_j'` coincide, when both have positive success probability
/// and differ.
pub fn pair_breakpoint(inst: &Instance, i: usize, j: usize, jp: usize) -> Option<f64> {
    let (fj, fjp) = (inst.f(j), inst.f(jp));
    if fj <= 0.0 || fjp <= 0.0 || fj == fjp {
        return None;
    }
    let ci = inst.c(i);
    Some(((ci - inst.c(j)) * fjp - (ci - inst.c(jp)) * fj) / ((fjp - fj) * inst.f(i)))
}

/// Cut points of `[0, 1]` and the fixed `η` order on each interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalPartition {
    pub suggested: usize,
    pub cutpoints: Vec<f64>,
    /// `orders[ℓ]` lists every action except `suggested` by ascending `η` on interval `ℓ`;
    /// actions with `f = 0` come first.
    pub orders: Vec<Vec<usize>>,
}

impl IntervalPartition {
    pub fn intervals(&self) -> usize {
        self.cutpoints.len() - 1
    }

    pub fn interval(&self, l: usize) -> (f64, f64) {
        (self.cutpoints[l], self.cutpoints[l + 1])
    }
}

/// Ascending `η` order at payment `alpha`; `p_i` shifts every `η` equally so it is omitted.
pub(crate) fn order_at(inst: &Instance, i: usize, alpha: f64) -> Vec<usize> {
    let key = |j: usize| Curve::new(inst, i, j).map_or(f64::NEG_INFINITY, |c| c.at(alpha));
    let mut order: Vec<usize> = (0..inst.n()).filter(|&j| j != i).collect();
    order.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
    order
}

pub fn breakpoints(inst: &Instance, i: usize) -> Result<IntervalPartition> {
    let (fi, ci) = (inst.f(i), inst.c(i));
    if !(fi > ci && ci > 0.0) {
        return Err(Error::input(format!(
            "breakpoints need f(i) > c(i) > 0, got f = {fi}, c = {ci} for {:?}",
            inst.id(i)
        )));
    }
    let others: Vec<usize> = (0..inst.n()).filter(|&j| j != i).collect();
    let mut inner: Vec<f64> = others
        .iter()
        .enumerate()
        .flat_map(|(x, &j)| others[x + 1..].iter().filter_map(move |&jp| pair_breakpoint(inst, i, j, jp)))
        .filter(|a| *a > 0.0 && *a < 1.0)
        .collect();
    inner.sort_by(f64::total_cmp);

    let mut cutpoints = vec![0.0];
    for a in inner {
        if a - cutpoints.last().copied().unwrap_or(0.0) > DEDUP_TOL && 1.0 - a > DEDUP_TOL {
            cutpoints.push(a);
        }
    }
    cutpoints.push(1.0);

    let orders = cutpoints
        .windows(2)
        .map(|w| order_at(inst, i, 0.5 * (w[0] + w[1])))
        .collect();
    Ok(IntervalPartition { suggested: i, cutpoints, orders })
}
