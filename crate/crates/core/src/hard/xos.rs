//! The XOS family with a hidden rotation class.
//!
//! Actions are `⊥, g, x, 1, .., k` at indices `0, 1, 2, 3, .., k + 2`. The
//! cost of a set is `1[⊥] + 1[g]`, plus `1/40` if it meets `{x, 1, .., k}`,
//! plus `level/(80k)` where the level of `R = S ∩ [k]` is 0 for `R = ∅`, 2 for
//! large sets outside `cyclic(T)`, and 1 otherwise.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use crate::costfn::checks::XosCertificate;
use crate::costfn::{check_prices, demand_prefers, price, SetFunction};
use crate::error::{Error, Result};
use crate::model::{Action, Instance, InspectionScheme};
use crate::subset::{Subset, MAX_ACTIONS};

pub const BOT: usize = 0;
pub const G: usize = 1;
pub const X: usize = 2;
/// Index of element `1` of `[k]`.
pub const FIRST: usize = 3;

pub fn is_prime(k: usize) -> bool {
    k >= 2 && (2..).take_while(|d| d * d <= k).all(|d| !k.is_multiple_of(d))
}

/// `⌈4k/5⌉`.
pub fn default_threshold(k: usize) -> usize {
    (4 * k).div_ceil(5)
}

/// Rotates a `k`-bit mask by one position.
#[inline]
fn rotate(mask: u32, k: usize) -> u32 {
    let full = (1u32 << k) - 1;
    ((mask << 1) | (mask >> (k - 1))) & full
}

/// Smallest rotation of a `k`-bit mask: a normal form for rotation classes.
pub fn canonical_rotation(mask: u32, k: usize) -> u32 {
    let mut best = mask;
    let mut cur = mask;
    for _ in 1..k {
        cur = rotate(cur, k);
        best = best.min(cur);
    }
    best
}

/// All distinct cyclic shifts of `t` within `[k]` (bit `e` stands for element `e + 1`).
pub fn cyclic(t: u32, k: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(k);
    let mut cur = t;
    for _ in 0..k {
        if !out.contains(&cur) {
            out.push(cur);
        }
        cur = rotate(cur, k);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HardParams {
    pub k: usize,
    /// Hidden set as a `k`-bit mask over `[k]`.
    pub t: u32,
    pub m_override: Option<usize>,
}

impl HardParams {
    pub fn new(k: usize, t: u32, m_override: Option<usize>) -> Result<Self> {
        if !(is_prime(k) && k > 5) {
            return Err(Error::input(format!("k must be a prime larger than 5, got {k}")));
        }
        if k + FIRST > MAX_ACTIONS {
            return Err(Error::SizeLimit(format!("k = {k} gives more than {MAX_ACTIONS} actions")));
        }
        let p = HardParams { k, t, m_override };
        let m = p.threshold();
        if m == 0 || m >= k {
            return Err(Error::input(format!("threshold must be in 1..{k}, got {m}")));
        }
        if t >> k != 0 || t.count_ones() as usize != m {
            return Err(Error::input(format!("T must be a subset of [{k}] of size {m}")));
        }
        Ok(p)
    }

    /// Cardinality of `T`, which is also the size threshold of level 2.
    pub fn threshold(&self) -> usize {
        self.m_override.unwrap_or_else(|| default_threshold(self.k))
    }

    pub fn canonical(&self) -> bool {
        self.m_override.is_none()
    }

    pub fn n(&self) -> usize {
        self.k + FIRST
    }

    /// `T` as elements of `[k]`, 1-based.
    pub fn t_elements(&self) -> Vec<usize> {
        (0..self.k).filter(|e| self.t >> e & 1 == 1).map(|e| e + 1).collect()
    }
}

/// `v_T`, with the rotation class of `T` precomputed.
#[derive(Clone, Debug)]
pub struct XosHardCost {
    k: usize,
    m: usize,
    t_size: u32,
    t_canon: u32,
}

impl XosHardCost {
    pub fn new(params: &HardParams) -> Self {
        XosHardCost {
            k: params.k,
            m: params.threshold(),
            t_size: params.t.count_ones(),
            t_canon: canonical_rotation(params.t, params.k),
        }
    }

    #[inline]
    fn core_mask(&self, s: Subset) -> u32 {
        (s.bits() >> FIRST) & ((1u32 << self.k) - 1)
    }

    pub fn is_cyclic(&self, r: u32) -> bool {
        r.count_ones() == self.t_size && canonical_rotation(r, self.k) == self.t_canon
    }

    fn level(&self, r: u32) -> u32 {
        let size = r.count_ones() as usize;
        if size == 0 {
            0
        } else if size >= self.m && !self.is_cyclic(r) {
            2
        } else {
            1
        }
    }

    fn unit(&self) -> f64 {
        1.0 / (80.0 * self.k as f64)
    }

    fn base(s: Subset) -> f64 {
        f64::from(u8::from(s.contains(BOT))) + f64::from(u8::from(s.contains(G)))
    }

    fn core_subset(&self, r: u32) -> Subset {
        Subset::from_bits(r << FIRST)
    }
}

impl SetFunction for XosHardCost {
    fn ground_size(&self) -> usize {
        self.k + FIRST
    }

    fn value(&self, s: Subset) -> f64 {
        let r = self.core_mask(s);
        let touched = if s.contains(X) || r != 0 { 1.0 / 40.0 } else { 0.0 };
        Self::base(s) + touched + f64::from(self.level(r)) * self.unit()
    }

    fn demand(&self, prices: &[f64]) -> Result<Subset> {
        demand_vt(self, prices)
    }
}

/// `C(n, r)` as `f64`.
fn binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    (0..r).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

/// Lazy evaluator of the XOS clause family certifying `v_T`.
///
/// Clauses: `γ_x` puts `1/40` on `x`; `γ_i` puts `1/40 + 1/(80k)` on `i ∈ [k]`;
/// `γ_{S'}` spreads `1/40 + 1/(40k)` evenly over `S' ⊆ [k]` with `|S'| >= m`
/// and `S' ∉ cyclic(T)`. Every clause also puts 1 on `⊥` and on `g`.
#[derive(Clone, Debug)]
pub struct XosHardCertificate {
    cost: XosHardCost,
    members: Vec<u32>,
}

impl XosHardCertificate {
    pub fn new(params: &HardParams) -> Self {
        XosHardCertificate { cost: XosHardCost::new(params), members: cyclic(params.t, params.k) }
    }

    /// Largest `|R ∩ S'| / |S'|` over the eligible `S'`.
    fn best_ratio(&self, r: u32) -> f64 {
        let (k, m) = (self.cost.k, self.cost.m);
        let size = r.count_ones() as usize;
        if size == 0 {
            return 0.0;
        }
        if size >= m && !self.cost.is_cyclic(r) {
            return 1.0;
        }
        if self.cost.is_cyclic(r) {
            return m as f64 / (m + 1) as f64;
        }
        let covering = self.members.iter().filter(|&&c| c & r == r).count() as f64;
        if binomial(k - size, m - size) > covering {
            size as f64 / m as f64
        } else {
            size as f64 / (m + 1) as f64
        }
    }

    /// Every clause as an explicit weight vector (exponential in `k`).
    pub fn materialize(&self) -> Vec<Vec<f64>> {
        let (k, m) = (self.cost.k, self.cost.m);
        let n = k + FIRST;
        let blank = || {
            let mut w = vec![0.0; n];
            w[BOT] = 1.0;
            w[G] = 1.0;
            w
        };
        let mut out = Vec::new();
        let mut gx = blank();
        gx[X] = 1.0 / 40.0;
        out.push(gx);
        for e in 0..k {
            let mut gi = blank();
            gi[FIRST + e] = 1.0 / 40.0 + self.cost.unit();
            out.push(gi);
        }
        let top = 1.0 / 40.0 + 2.0 * self.cost.unit();
        for mask in 1u32..(1 << k) {
            let size = mask.count_ones() as usize;
            if size >= m && !self.cost.is_cyclic(mask) {
                let mut gs = blank();
                for e in (0..k).filter(|e| mask >> e & 1 == 1) {
                    gs[FIRST + e] = top / size as f64;
                }
                out.push(gs);
            }
        }
        out
    }
}

impl XosCertificate for XosHardCertificate {
    fn max_clause(&self, s: Subset) -> f64 {
        let r = self.cost.core_mask(s);
        let gx: f64 = if s.contains(X) { 1.0 / 40.0 } else { 0.0 };
        let gi = if r != 0 { 1.0 / 40.0 + self.cost.unit() } else { 0.0 };
        let gs = (1.0 / 40.0 + 2.0 * self.cost.unit()) * self.best_ratio(r);
        XosHardCost::base(s) + gx.max(gi).max(gs)
    }
}

/// Size-`m` subsets of `[k]` in ascending price, ties in the order of `sorted`.
struct CheapestSets<'a> {
    sorted: &'a [usize],
    prices: &'a [f64],
    heap: BinaryHeap<Reverse<(OrdF64, Vec<usize>)>>,
    seen: HashSet<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl<'a> CheapestSets<'a> {
    fn new(sorted: &'a [usize], prices: &'a [f64], m: usize) -> Self {
        let mut me = CheapestSets { sorted, prices, heap: BinaryHeap::new(), seen: HashSet::new() };
        me.push((0..m).collect());
        me
    }

    fn push(&mut self, pos: Vec<usize>) {
        if self.seen.insert(pos.clone()) {
            let p = pos.iter().map(|&t| self.prices[self.sorted[t]]).sum();
            self.heap.push(Reverse((OrdF64(p), pos)));
        }
    }

    fn next(&mut self) -> Option<(f64, Vec<usize>)> {
        let Reverse((OrdF64(p), pos)) = self.heap.pop()?;
        let len = self.sorted.len();
        for t in 0..pos.len() {
            let limit = if t + 1 < pos.len() { pos[t + 1] } else { len };
            if pos[t] + 1 < limit {
                let mut succ = pos.clone();
                succ[t] += 1;
                self.push(succ);
            }
        }
        Some((p, pos))
    }
}

/// Exact demand oracle for `v_T` from a handful of candidate sets.
///
/// Over `[k] ∪ {x}` only `∅`, `{x}`, the cheapest singleton, the cheapest
/// size-`m` sets outside `cyclic(T)`, and the cheapest size-`(m+1)` set can
/// maximize value minus price; each is combined with every choice for `⊥` and `g`.
pub fn demand_vt(cost: &XosHardCost, prices: &[f64]) -> Result<Subset> {
    let (k, m) = (cost.k, cost.m);
    check_prices(prices, k + FIRST)?;
    let elem_price: Vec<f64> = (0..k).map(|e| prices[FIRST + e]).collect();
    let mut sorted: Vec<usize> = (0..k).collect();
    sorted.sort_by(|&a, &b| elem_price[a].total_cmp(&elem_price[b]).then(a.cmp(&b)));
    let mask_of = |pos: &[usize]| pos.iter().fold(0u32, |acc, &t| acc | 1 << sorted[t]);

    let mut core = vec![Subset::EMPTY, Subset::singleton(X), cost.core_subset(1 << sorted[0])];
    let mut walk = CheapestSets::new(&sorted, &elem_price, m);
    let mut cutoff = f64::INFINITY;
    while let Some((p, pos)) = walk.next() {
        if p > cutoff + 1e-12 {
            break;
        }
        let r = mask_of(&pos);
        if !cost.is_cyclic(r) {
            cutoff = cutoff.min(p);
            core.push(cost.core_subset(r));
        }
    }
    if m < k {
        core.push(cost.core_subset(mask_of(&(0..=m).collect::<Vec<_>>())));
    }

    let mut best = (Subset::EMPTY, 0.0);
    for c in core {
        for extra in [Subset::EMPTY, Subset::singleton(BOT), Subset::singleton(G), Subset::from_iter([BOT, G])] {
            let s = c.union(extra);
            let cand = (s, cost.value(s) - price(prices, s));
            if demand_prefers(cand, best) {
                best = cand;
            }
        }
    }
    Ok(best.0)
}

/// Instance of the family for the given hidden set.
pub fn gen_xos_hard(params: &HardParams) -> Result<Instance> {
    let mut actions = vec![
        Action::new("bot", 0.0, 0.0),
        Action::new("g", 0.1, 1.0),
        Action::new("x", 0.01, 0.3),
    ];
    actions.extend((1..=params.k).map(|e| Action::new(e.to_string(), 0.01, 0.2)));
    Instance::new(actions, "bot", std::sync::Arc::new(XosHardCost::new(params)))
}

/// The optimal scheme: suggest `g` at `α = 1/10`, inspect `S ∪ {x}` for each
/// `S ∈ cyclic(T)` with probability `1/(2|T|)`, `{x}` with `2/3 - k/(2|T|)`, and nothing otherwise.
pub fn unique_optimal_scheme(params: &HardParams) -> Result<InspectionScheme> {
    if !params.canonical() {
        return Err(Error::input("the reference scheme is defined only for |T| = ⌈4k/5⌉"));
    }
    let t = params.t.count_ones() as f64;
    let k = params.k as f64;
    let lone = 2.0 / 3.0 - k / (2.0 * t);
    if lone < 0.0 {
        return Err(Error::Invariant(format!("p({{x}}) = {lone} is negative")));
    }
    let mut dist: Vec<(Subset, f64)> = cyclic(params.t, params.k)
        .into_iter()
        .map(|r| (Subset::from_bits(r << FIRST).with(X), 1.0 / (2.0 * t)))
        .collect();
    dist.push((Subset::singleton(X), lone));
    dist.push((Subset::EMPTY, 1.0 / 3.0));
    Ok(InspectionScheme::new(G, 0.1, dist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costfn::demand_default;

    fn params7() -> HardParams {
        HardParams::new(7, 0b0111111, None).unwrap()
    }

    #[test]
    fn cyclic_examples() {
        assert_eq!(cyclic(0b1111111, 7), vec![0b1111111]);
        let shifts = cyclic(0b0111111, 7);
        assert_eq!(shifts.len(), 7);
        assert!(shifts.iter().all(|s| s.count_ones() == 6));
        let t = 0b0001011u32;
        let members = cyclic(t, 7);
        for &s in &members {
            assert!(cyclic(s, 7).iter().all(|r| members.contains(r)));
        }
    }

    #[test]
    fn params_validation() {
        assert!(HardParams::new(9, 0, None).is_err());
        assert!(HardParams::new(5, 0b1111, None).is_err());
        assert!(HardParams::new(7, 0b111, None).is_err());
        assert!(HardParams::new(13, 0b1111111, Some(7)).is_ok());
        assert_eq!(default_threshold(13), 11);
    }

    #[test]
    fn cost_examples() {
        let p = params7();
        let v = XosHardCost::new(&p);
        let unit = 1.0 / 560.0;
        assert_eq!(v.value(Subset::singleton(G)), 1.0);
        assert_eq!(v.value(Subset::from_iter([BOT, G])), 2.0);
        assert_eq!(v.value(Subset::singleton(X)), 1.0 / 40.0);
        let member = Subset::from_bits(0b0111111 << FIRST).with(X);
        assert!((v.value(member) - (1.0 / 40.0 + unit)).abs() < 1e-15);
        let all = Subset::from_bits(0b1111111 << FIRST);
        assert!((v.value(all) - (1.0 / 40.0 + 2.0 * unit)).abs() < 1e-15);
    }

    #[test]
    fn demand_examples() {
        let p = params7();
        let v = XosHardCost::new(&p);
        assert_eq!(demand_vt(&v, &[2.0; 10]).unwrap(), Subset::EMPTY);
        let mut q = vec![1.0; 10];
        q[BOT] = 2.0;
        q[G] = 2.0;
        q[X] = 0.0;
        assert_eq!(demand_vt(&v, &q).unwrap(), Subset::singleton(X));
        let mut tiny = vec![1e-6; 10];
        tiny[BOT] = 5.0;
        tiny[G] = 5.0;
        tiny[X] = 5.0;
        let d = demand_vt(&v, &tiny).unwrap();
        assert_eq!(d, demand_default(&v, &tiny).unwrap());
        assert_eq!(d, Subset::from_bits(0b1111111 << FIRST));
    }

    #[test]
    fn lazy_certificate_matches_materialized_family() {
        let p = HardParams::new(11, 0b00111111111, None).unwrap();
        let lazy = XosHardCertificate::new(&p);
        let clauses = lazy.materialize();
        assert_eq!(clauses.len(), 1 + 11 + 56);
        for s in Subset::all(p.n()) {
            assert!((lazy.max_clause(s) - clauses.max_clause(s)).abs() < 1e-12, "{s:?}");
        }
    }

    #[test]
    fn reference_scheme_shape() {
        let p = params7();
        let s = unique_optimal_scheme(&p).unwrap();
        assert_eq!(s.distribution.len(), 9);
        assert!((s.total_mass() - 1.0).abs() < 1e-12);
        assert!(unique_optimal_scheme(&HardParams::new(13, 0b1111111, Some(7)).unwrap()).is_err());
    }
}
