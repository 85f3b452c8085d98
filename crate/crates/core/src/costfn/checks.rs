//! Class-membership checkers for set functions.
//!
//! Exhaustive modes enumerate every subset and are limited to
//! [`MAX_EXHAUSTIVE`] elements. Sampled modes draw subsets from a seeded
//! ChaCha stream so that any reported witness replays exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::subset::Subset;

use super::SetFunction;

pub const MAX_EXHAUSTIVE: usize = 16;

/// Slack allowed when comparing set-function values.
pub const CHECK_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive,
    Sampled { seed: u64, count: usize },
}

/// A violation found by a checker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `v(S ∪ {element}) < v(S)`.
    Monotone { set: Subset, element: usize },
    /// `v(element | S) < v(element | S ∪ {extra})`.
    Submodular { set: Subset, element: usize, extra: usize },
    /// `max_ℓ γ_ℓ(S) != v(S)`.
    Xos { set: Subset },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl CheckOutcome {
    fn pass() -> Self {
        CheckOutcome { holds: true, witness: None }
    }

    fn fail(w: Witness) -> Self {
        CheckOutcome { holds: false, witness: Some(w) }
    }
}

fn exhaustive_limit(n: usize) -> Result<()> {
    if n > MAX_EXHAUSTIVE {
        return Err(Error::SizeLimit(format!(
            "exhaustive checks support n <= {MAX_EXHAUSTIVE}, got {n}"
        )));
    }
    Ok(())
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> Subset {
    let mask = if n == 0 { 0 } else { rng.gen::<u32>() >> (32 - n) };
    Subset::from_bits(mask)
}

fn monotone_at<F: SetFunction + ?Sized>(f: &F, s: Subset, e: usize) -> Option<Witness> {
    if s.contains(e) {
        return None;
    }
    (f.value(s.with(e)) < f.value(s) - CHECK_TOL).then_some(Witness::Monotone { set: s, element: e })
}

/// Checks `v(S ∪ {e}) >= v(S)` for all sets `S` and elements `e`.
pub fn check_monotone<F: SetFunction + ?Sized>(f: &F, mode: CheckMode) -> Result<CheckOutcome> {
    let n = f.ground_size();
    match mode {
        CheckMode::Exhaustive => {
            exhaustive_limit(n)?;
            for s in Subset::all(n) {
                for e in 0..n {
                    if let Some(w) = monotone_at(f, s, e) {
                        return Ok(CheckOutcome::fail(w));
                    }
                }
            }
        }
        CheckMode::Sampled { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                if n == 0 {
                    break;
                }
                let s = random_subset(&mut rng, n);
                let e = rng.gen_range(0..n);
                if let Some(w) = monotone_at(f, s, e) {
                    return Ok(CheckOutcome::fail(w));
                }
            }
        }
    }
    Ok(CheckOutcome::pass())
}

fn submodular_at<F: SetFunction + ?Sized>(f: &F, s: Subset, i: usize, j: usize) -> Option<Witness> {
    if i == j || s.contains(i) || s.contains(j) {
        return None;
    }
    let small = f.value(s.with(i)) - f.value(s);
    let big_base = s.with(j);
    let large = f.value(big_base.with(i)) - f.value(big_base);
    (small < large - CHECK_TOL).then_some(Witness::Submodular { set: s, element: i, extra: j })
}

/// Checks `v(i | S) >= v(i | S ∪ {j})` for all `S` and `i, j ∉ S`.
pub fn check_submodular<F: SetFunction + ?Sized>(f: &F, mode: CheckMode) -> Result<CheckOutcome> {
    let n = f.ground_size();
    match mode {
        CheckMode::Exhaustive => {
            exhaustive_limit(n)?;
            for s in Subset::all(n) {
                let base = f.value(s);
                for i in (0..n).filter(|i| !s.contains(*i)) {
                    let small = f.value(s.with(i)) - base;
                    for j in (0..n).filter(|j| *j != i && !s.contains(*j)) {
                        let sj = s.with(j);
                        let large = f.value(sj.with(i)) - f.value(sj);
                        if small < large - CHECK_TOL {
                            return Ok(CheckOutcome::fail(Witness::Submodular {
                                set: s,
                                element: i,
                                extra: j,
                            }));
                        }
                    }
                }
            }
        }
        CheckMode::Sampled { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                if n < 2 {
                    break;
                }
                let s = random_subset(&mut rng, n);
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                if let Some(w) = submodular_at(f, s, i, j) {
                    return Ok(CheckOutcome::fail(w));
                }
            }
        }
    }
    Ok(CheckOutcome::pass())
}

/// A family of additive clauses claimed to certify that a function is XOS.
///
/// Only the pointwise maximum is needed: `max_ℓ γ_ℓ(S) = v(S)` for every `S`
/// implies every clause is dominated by `v`.
pub trait XosCertificate: Sync {
    fn max_clause(&self, s: Subset) -> f64;
}

impl XosCertificate for [Vec<f64>] {
    fn max_clause(&self, s: Subset) -> f64 {
        self.iter()
            .map(|c| s.iter().map(|j| c[j]).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl XosCertificate for Vec<Vec<f64>> {
    fn max_clause(&self, s: Subset) -> f64 {
        self.as_slice().max_clause(s)
    }
}

/// Checks that `certificate` matches `f` pointwise on all `2^n` sets.
pub fn check_xos_pointwise<F, C>(f: &F, certificate: &C) -> Result<CheckOutcome>
where
    F: SetFunction + ?Sized,
    C: XosCertificate + ?Sized,
{
    let n = f.ground_size();
    exhaustive_limit(n)?;
    for s in Subset::all(n) {
        if (certificate.max_clause(s) - f.value(s)).abs() > CHECK_TOL {
            return Ok(CheckOutcome::fail(Witness::Xos { set: s }));
        }
    }
    Ok(CheckOutcome::pass())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costfn::CostSpec;

    #[test]
    fn additive_is_monotone_and_submodular() {
        let f = CostSpec::Additive { weights: vec![0.1, 0.0, 2.5, 1.0] };
        assert!(check_monotone(&f, CheckMode::Exhaustive).unwrap().holds);
        assert!(check_submodular(&f, CheckMode::Exhaustive).unwrap().holds);
        let clauses = vec![vec![0.1, 0.0, 2.5, 1.0]];
        assert!(check_xos_pointwise(&f, &clauses).unwrap().holds);
    }

    #[test]
    fn budget_additive_is_submodular() {
        let f = CostSpec::BudgetAdditive { weights: vec![0.4, 0.7, 0.2, 0.9], cap: 1.0 };
        assert!(check_submodular(&f, CheckMode::Exhaustive).unwrap().holds);
        let sampled = CheckMode::Sampled { seed: 3, count: 500 };
        assert!(check_submodular(&f, sampled).unwrap().holds);
    }

    #[test]
    fn constructed_monotonicity_violation() {
        // v({0}) = 2 but v({0, 1}) = 1
        let f = CostSpec::ExplicitTable { values: vec![0.0, 2.0, 0.0, 1.0] };
        let out = check_monotone(&f, CheckMode::Exhaustive).unwrap();
        assert!(!out.holds);
        assert_eq!(out.witness, Some(Witness::Monotone { set: Subset::singleton(0), element: 1 }));
    }

    #[test]
    fn xos_clauses_certify_themselves() {
        let clauses = vec![vec![1.0, 0.0, 0.3], vec![0.2, 0.9, 0.3], vec![0.5, 0.5, 0.0]];
        let f = CostSpec::XosClauses { clauses: clauses.clone() };
        assert!(check_xos_pointwise(&f, &clauses).unwrap().holds);
        let wrong = vec![clauses[0].clone()];
        assert!(!check_xos_pointwise(&f, &wrong).unwrap().holds);
    }

    #[test]
    fn supermodular_function_is_caught() {
        let f = CostSpec::ExplicitTable { values: vec![0.0, 1.0, 1.0, 3.0] };
        let out = check_submodular(&f, CheckMode::Exhaustive).unwrap();
        assert_eq!(out.witness, Some(Witness::Submodular { set: Subset::EMPTY, element: 0, extra: 1 }));
    }

    #[test]
    fn exhaustive_size_limit() {
        let f = CostSpec::Additive { weights: vec![1.0; 17] };
        assert!(matches!(check_monotone(&f, CheckMode::Exhaustive), Err(Error::SizeLimit(_))));
        assert!(check_monotone(&f, CheckMode::Sampled { seed: 1, count: 100 }).unwrap().holds);
    }
}
